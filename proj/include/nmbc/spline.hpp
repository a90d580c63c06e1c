#pragma once

#include <Eigen/Dense>

namespace nmbc {

/// Cubic interpolating spline in B-spline form with not-a-knot end
/// conditions. Reproduces cubic polynomials exactly and is C2 across knots.
/// Evaluation outside [xmin, xmax] clamps to the domain.
class CubicSpline1D {
 public:
  /// `x` strictly increasing, size >= 4; `y` same size.
  static CubicSpline1D fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

  double value(double x) const;
  double derivative(double x) const;

  double xmin() const { return knots_[3]; }
  double xmax() const { return knots_[knots_.size() - 4]; }
  const Eigen::VectorXd& coefficients() const { return coef_; }

 private:
  Eigen::VectorXd knots_;  // clamped not-a-knot knot vector
  Eigen::VectorXd coef_;   // n control coefficients
};

/// Tensor-product version of CubicSpline1D for two variables.
/// f is na x nb with f(i, j) the sample at (xa[i], xb[j]).
class CubicSpline2D {
 public:
  static CubicSpline2D fit(const Eigen::VectorXd& xa, const Eigen::VectorXd& xb,
                           const Eigen::MatrixXd& f);

  double value(double a, double b) const;
  /// Partial derivative along the first (dim == 0) or second (dim == 1) axis.
  double derivative(double a, double b, int dim) const;

  double amin() const { return knots_a_[3]; }
  double amax() const { return knots_a_[knots_a_.size() - 4]; }
  double bmin() const { return knots_b_[3]; }
  double bmax() const { return knots_b_[knots_b_.size() - 4]; }

 private:
  Eigen::VectorXd knots_a_, knots_b_;
  Eigen::MatrixXd coef_;  // na x nb control net
};

}  // namespace nmbc
