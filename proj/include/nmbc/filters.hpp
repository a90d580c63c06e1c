#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nmbc {

/// Second-order Butterworth low-pass (bilinear transform), direct form II
/// transposed, zero initial state. Unity DC gain by construction.
class LowPass2 {
 public:
  LowPass2(double cutoff_hz, double sample_hz) {
    if (cutoff_hz <= 0.0) throw std::invalid_argument("low-pass cutoff must be positive");
    if (cutoff_hz >= 0.5 * sample_hz) {
      throw std::invalid_argument("low-pass cutoff must be below the Nyquist frequency");
    }
    const double k = std::tan(std::numbers::pi * cutoff_hz / sample_hz);
    const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k * k);
    b0_ = k * k * norm;
    b1_ = 2.0 * b0_;
    b2_ = b0_;
    a1_ = 2.0 * (k * k - 1.0) * norm;
    a2_ = (1.0 - std::numbers::sqrt2 * k + k * k) * norm;
  }

  double step(double x) {
    const double y = b0_ * x + s1_;
    s1_ = b1_ * x - a1_ * y + s2_;
    s2_ = b2_ * x - a2_ * y;
    return y;
  }

  void reset() { s1_ = s2_ = 0.0; }

 private:
  double b0_, b1_, b2_, a1_, a2_;
  double s1_ = 0.0, s2_ = 0.0;
};

}  // namespace nmbc
