#pragma once

#include <stdexcept>
#include <string>

namespace nmbc {

/// Malformed or inconsistent input data (files, schemas, channel wiring).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A numerical procedure failed (non-convergence, divergence, bad bracket).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace nmbc
