#include "nmbc/activation.hpp"

#include <cmath>
#include <stdexcept>

#include "nmbc/errors.hpp"
#include "nmbc/filters.hpp"

namespace nmbc {

double activation(double u_bar, double shape_E) {
  if (!(shape_E >= -3.0 && shape_E < 0.0)) {
    throw std::invalid_argument("activation: shape factor must be in [-3, 0)");
  }
  if (!(u_bar >= 0.0 && u_bar <= 1.0)) {
    throw std::invalid_argument("activation: excitation must be in [0, 1]");
  }
  // expm1 keeps the E -> 0- limit (identity map) accurate.
  return std::expm1(shape_E * u_bar) / std::expm1(shape_E);
}

Trace envelope(const Trace& raw, double cutoff_hz) {
  const double fs = 1.0 / sample_interval(raw);
  if (cutoff_hz >= 0.5 * fs) {
    throw std::invalid_argument("envelope: cutoff must be below the Nyquist frequency");
  }
  Trace out = raw;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    LowPass2 lp(cutoff_hz, fs);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      // The filter can ring marginally below zero between bursts; an
      // envelope is non-negative by contract.
      out.values(r, c) = std::max(0.0, lp.step(std::abs(raw.values(r, c))));
    }
  }
  return out;
}

Trace normalize_mvc(const Trace& env, const std::map<std::string, double>& mvc) {
  Trace out = env;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const auto it = mvc.find(env.channels[c]);
    if (it == mvc.end()) {
      throw ParseError("normalize_mvc: no MVC for channel '" + env.channels[c] + "'");
    }
    if (!(it->second > 0.0)) {
      throw ParseError("normalize_mvc: MVC for '" + env.channels[c] + "' must be positive");
    }
    out.values.col(c) = (env.values.col(c) / it->second).cwiseMax(0.0).cwiseMin(1.0);
  }
  return out;
}

}  // namespace nmbc
