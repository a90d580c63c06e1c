#include "nmbc/log.hpp"

#include <cstdlib>
#include <iostream>

namespace nmbc {

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("NMBC_LOG");
    if (!env) return 1;
    return std::atoi(env);
  }();
  return level;
}

void log_warn(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[nmbc] warning: " << msg << "\n";
}

void log_info(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[nmbc] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= 3) std::cerr << "[nmbc] debug: " << msg << "\n";
}

}  // namespace nmbc
