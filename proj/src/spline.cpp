#include "nmbc/spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nmbc {

namespace {

// Clamped cubic knot vector with the first and last interior sites removed
// (de Boor's not-a-knot construction): n data sites give exactly n basis
// functions.
Eigen::VectorXd not_a_knot_vector(const Eigen::VectorXd& x) {
  const auto n = x.size();
  Eigen::VectorXd t(n + 4);
  for (int i = 0; i < 4; ++i) {
    t[i] = x[0];
    t[n + i] = x[n - 1];
  }
  for (Eigen::Index i = 2; i <= n - 3; ++i) t[i + 2] = x[i];
  return t;
}

void check_sites(const Eigen::VectorXd& x) {
  if (x.size() < 4) throw std::invalid_argument("spline needs at least 4 knots");
  for (Eigen::Index i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) {
      throw std::invalid_argument("spline knots must be strictly increasing");
    }
  }
  if (!x.allFinite()) throw std::invalid_argument("spline knots must be finite");
}

struct Basis {
  Eigen::Index span;  // index mu with t[mu] <= u < t[mu+1]
  double n[4];        // nonzero cubic basis values, indices span-3 .. span
  double dn[4];       // their first derivatives
};

// Cox-de Boor triangle for the four nonzero cubic basis functions plus their
// derivatives via the degree-2 basis.
Basis eval_basis(const Eigen::VectorXd& t, double u) {
  const Eigen::Index lo = 3;
  const Eigen::Index hi = t.size() - 5;  // last nondegenerate span start
  u = std::clamp(u, t[lo], t[t.size() - 4]);
  Eigen::Index span = std::upper_bound(t.data() + lo, t.data() + hi + 1, u) - t.data() - 1;
  span = std::clamp(span, lo, hi);

  Basis out;
  out.span = span;
  double left[4], right[4];
  double n2[3] = {1.0, 0.0, 0.0};  // degree-2 values filled at j == 2
  out.n[0] = 1.0;
  for (int j = 1; j <= 3; ++j) {
    left[j] = u - t[span + 1 - j];
    right[j] = t[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out.n[r] / (right[r + 1] + left[j - r]);
      out.n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out.n[j] = saved;
    if (j == 2) {
      n2[0] = out.n[0];
      n2[1] = out.n[1];
      n2[2] = out.n[2];
    }
  }

  // B'_{i,3} = 3 * (B_{i,2}/(t[i+3]-t[i]) - B_{i+1,2}/(t[i+4]-t[i+1])),
  // where the degree-2 basis is nonzero for i in [span-2, span].
  for (int k = 0; k < 4; ++k) {
    const Eigen::Index i = span - 3 + k;
    double term1 = 0.0, term2 = 0.0;
    if (i >= span - 2) {
      const double d = t[i + 3] - t[i];
      if (d > 0.0) term1 = n2[i - (span - 2)] / d;
    }
    if (i + 1 <= span) {
      const double d = t[i + 4] - t[i + 1];
      if (d > 0.0) term2 = n2[i + 1 - (span - 2)] / d;
    }
    out.dn[k] = 3.0 * (term1 - term2);
  }
  return out;
}

// Collocation matrix A with A(i, j) = B_j(x_i).
Eigen::MatrixXd collocation(const Eigen::VectorXd& t, const Eigen::VectorXd& x) {
  const auto n = x.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Basis b = eval_basis(t, x[i]);
    for (int k = 0; k < 4; ++k) a(i, b.span - 3 + k) = b.n[k];
  }
  return a;
}

}  // namespace

CubicSpline1D CubicSpline1D::fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  check_sites(x);
  if (y.size() != x.size()) throw std::invalid_argument("spline: x/y size mismatch");
  CubicSpline1D s;
  s.knots_ = not_a_knot_vector(x);
  s.coef_ = Eigen::PartialPivLU<Eigen::MatrixXd>(collocation(s.knots_, x)).solve(y);
  return s;
}

double CubicSpline1D::value(double x) const {
  const Basis b = eval_basis(knots_, x);
  double v = 0.0;
  for (int k = 0; k < 4; ++k) v += b.n[k] * coef_[b.span - 3 + k];
  return v;
}

double CubicSpline1D::derivative(double x) const {
  const Basis b = eval_basis(knots_, x);
  double v = 0.0;
  for (int k = 0; k < 4; ++k) v += b.dn[k] * coef_[b.span - 3 + k];
  return v;
}

CubicSpline2D CubicSpline2D::fit(const Eigen::VectorXd& xa, const Eigen::VectorXd& xb,
                                 const Eigen::MatrixXd& f) {
  check_sites(xa);
  check_sites(xb);
  if (f.rows() != xa.size() || f.cols() != xb.size()) {
    throw std::invalid_argument("spline: grid value shape mismatch");
  }
  CubicSpline2D s;
  s.knots_a_ = not_a_knot_vector(xa);
  s.knots_b_ = not_a_knot_vector(xb);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu_a(collocation(s.knots_a_, xa));
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu_b(collocation(s.knots_b_, xb));
  // Interpolation condition A_a * C * A_b^T = F, solved one factor at a time.
  Eigen::MatrixXd c = lu_a.solve(f);
  s.coef_ = lu_b.solve(c.transpose()).transpose();
  return s;
}

double CubicSpline2D::value(double a, double b) const {
  const Basis ba = eval_basis(knots_a_, a);
  const Basis bb = eval_basis(knots_b_, b);
  double v = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      v += ba.n[i] * coef_(ba.span - 3 + i, bb.span - 3 + j) * bb.n[j];
  return v;
}

double CubicSpline2D::derivative(double a, double b, int dim) const {
  if (dim != 0 && dim != 1) throw std::invalid_argument("spline: dim must be 0 or 1");
  const Basis ba = eval_basis(knots_a_, a);
  const Basis bb = eval_basis(knots_b_, b);
  const double* wa = dim == 0 ? ba.dn : ba.n;
  const double* wb = dim == 1 ? bb.dn : bb.n;
  double v = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      v += wa[i] * coef_(ba.span - 3 + i, bb.span - 3 + j) * wb[j];
  return v;
}

}  // namespace nmbc
