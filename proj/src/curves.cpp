#include "nmbc/curves.hpp"

#include <cmath>
#include <stdexcept>

namespace nmbc {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// One-sided three-point end slope, clamped so the end interval stays
// monotone (Fritsch-Carlson edge handling).
double edge_slope(double h0, double h1, double d0, double d1) {
  double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
  if (sign(m) != sign(d0)) return 0.0;
  if (sign(d0) != sign(d1) && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
  return m;
}

}  // namespace

MonotoneCubic MonotoneCubic::fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const auto n = x.size();
  if (n < 2) throw std::invalid_argument("MonotoneCubic needs at least 2 knots");
  if (y.size() != n) throw std::invalid_argument("MonotoneCubic: x/y size mismatch");
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(x[i] > x[i - 1])) {
      throw std::invalid_argument("MonotoneCubic: knots must be strictly increasing");
    }
  }

  Eigen::VectorXd h(n - 1), d(n - 1);
  for (Eigen::Index i = 0; i < n - 1; ++i) {
    h[i] = x[i + 1] - x[i];
    d[i] = (y[i + 1] - y[i]) / h[i];
  }

  MonotoneCubic c;
  c.x_ = x;
  c.y_ = y;
  c.slope_.resize(n);
  if (n == 2) {
    c.slope_[0] = c.slope_[1] = d[0];
    return c;
  }
  c.slope_[0] = edge_slope(h[0], h[1], d[0], d[1]);
  c.slope_[n - 1] = edge_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  for (Eigen::Index i = 1; i < n - 1; ++i) {
    if (d[i - 1] == 0.0 || d[i] == 0.0 || sign(d[i - 1]) != sign(d[i])) {
      c.slope_[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      c.slope_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
  return c;
}

double MonotoneCubic::value(double x) const {
  const auto n = x_.size();
  if (x <= x_[0]) return y_[0];
  if (x >= x_[n - 1]) return y_[n - 1];
  Eigen::Index lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const Eigen::Index mid = (lo + hi) / 2;
    (x_[mid] <= x ? lo : hi) = mid;
  }
  const double h = x_[lo + 1] - x_[lo];
  const double t = (x - x_[lo]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * y_[lo] + h10 * h * slope_[lo] + h01 * y_[lo + 1] + h11 * h * slope_[lo + 1];
}

double tendon_force_norm(double strain) {
  if (strain <= 0.0) return 0.0;
  if (strain <= 0.0127) return 0.06142 * std::expm1(124.929 * strain);
  return 37.5 * strain - 0.2375;
}

double inverse_tendon_strain(double f_norm) {
  if (f_norm <= 0.0) return 0.0;
  if (f_norm <= 37.5 * 0.0127 - 0.2375) return std::log1p(f_norm / 0.06142) / 124.929;
  return (f_norm + 0.2375) / 37.5;
}

const CurveSet& CurveSet::defaults() {
  static const CurveSet set = [] {
    CurveSet s;
    Eigen::VectorXd ax(17), ay(17), px(13), py(13), vx(11), vy(11);
    ax << -5, 0, 0.401, 0.402, 0.4035, 0.52725, 0.62875, 0.71875, 0.86125, 1.045,
        1.2175, 1.43875, 1.61875, 1.62, 1.621, 2.2, 5;
    ay << 0, 0, 0, 0, 0, 0.226667, 0.636667, 0.856667, 0.95, 0.993333, 0.77,
        0.246667, 0, 0, 0, 0, 0;
    px << -5, 0.998, 0.999, 1, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.601, 1.602, 5;
    py << 0, 0, 0, 0, 0.035, 0.12, 0.26, 0.55, 1.17, 2, 2, 2, 2;
    vx << -10, -1, -0.6, -0.3, -0.1, 0, 0.1, 0.3, 0.6, 0.8, 10;
    vy << 0, 0, 0.08, 0.2, 0.55, 1, 1.4, 1.6, 1.7, 1.75, 1.75;
    s.active_fl = MonotoneCubic::fit(ax, ay);
    s.passive_fl = MonotoneCubic::fit(px, py);
    s.fv = MonotoneCubic::fit(vx, vy);
    return s;
  }();
  return set;
}

}  // namespace nmbc
