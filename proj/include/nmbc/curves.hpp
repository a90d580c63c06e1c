#pragma once

#include <Eigen/Dense>

namespace nmbc {

/// Monotonicity-preserving cubic Hermite interpolant (Fritsch-Carlson
/// slopes). Passes through every knot, never overshoots the local data
/// range, and extrapolates with the boundary value.
class MonotoneCubic {
 public:
  static MonotoneCubic fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

  double value(double x) const;

  const Eigen::VectorXd& x() const { return x_; }
  const Eigen::VectorXd& y() const { return y_; }

 private:
  Eigen::VectorXd x_, y_, slope_;
};

/// Normalized tendon force as a function of strain: zero when slack, an
/// exponential toe region up to 1.27% strain, linear beyond.
double tendon_force_norm(double strain);

/// Inverse of tendon_force_norm for non-negative normalized force.
double inverse_tendon_strain(double f_norm);

/// The three normalized muscle force relationships (active force-length,
/// passive force-length, force-velocity) tabulated over normalized fiber
/// length / velocity, plus the tendon law above.
struct CurveSet {
  MonotoneCubic active_fl;
  MonotoneCubic passive_fl;
  MonotoneCubic fv;

  /// The standard curve set built from the published knot tables.
  static const CurveSet& defaults();
};

}  // namespace nmbc
