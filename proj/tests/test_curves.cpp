#include <doctest.h>

#include <cmath>
#include <vector>

#include "nmbc/curves.hpp"

using namespace nmbc;

namespace {

// Published knot tables, frozen independently of src/curves.cpp.
const std::vector<double> kActiveX = {-5,     0,       0.401,   0.402,   0.4035, 0.52725,
                                      0.62875, 0.71875, 0.86125, 1.045,  1.2175, 1.43875,
                                      1.61875, 1.62,    1.621,   2.2,    5};
const std::vector<double> kActiveY = {0, 0, 0, 0, 0, 0.226667, 0.636667, 0.856667,
                                      0.95, 0.993333, 0.77, 0.246667, 0, 0, 0, 0, 0};
const std::vector<double> kPassiveX = {-5,  0.998, 0.999, 1,   1.1,   1.2,   1.3,
                                       1.4, 1.5,   1.6,   1.601, 1.602, 5};
const std::vector<double> kPassiveY = {0, 0, 0, 0, 0.035, 0.12, 0.26, 0.55, 1.17, 2, 2, 2, 2};
const std::vector<double> kFvX = {-10, -1, -0.6, -0.3, -0.1, 0, 0.1, 0.3, 0.6, 0.8, 10};
const std::vector<double> kFvY = {0, 0, 0.08, 0.2, 0.55, 1, 1.4, 1.6, 1.7, 1.75, 1.75};

// Independently coded monotone cubic Hermite evaluator (same definition,
// written from the formulas rather than sharing code with the library).
double oracle_eval(const std::vector<double>& xs, const std::vector<double>& ys, double q) {
  const std::size_t n = xs.size();
  std::vector<double> h(n - 1), delta(n - 1), m(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = xs[i + 1] - xs[i];
    delta[i] = (ys[i + 1] - ys[i]) / h[i];
  }
  auto sgn = [](double v) { return (v > 0) - (v < 0); };
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] == 0.0 || delta[i] == 0.0 || sgn(delta[i - 1]) != sgn(delta[i])) {
      m[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  auto edge = [&](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (sgn(s) != sgn(d0)) return 0.0;
    if (sgn(d0) != sgn(d1) && std::fabs(s) > 3.0 * std::fabs(d0)) return 3.0 * d0;
    return s;
  };
  m[0] = edge(h[0], h[1], delta[0], delta[1]);
  m[n - 1] = edge(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);

  if (q <= xs.front()) return ys.front();
  if (q >= xs.back()) return ys.back();
  std::size_t k = 0;
  while (k + 2 < n && xs[k + 1] <= q) ++k;
  // Hermite segment as an explicit polynomial in s = q - x_k.
  const double s = q - xs[k];
  const double hk = h[k];
  const double c2 = (3.0 * delta[k] - 2.0 * m[k] - m[k + 1]) / hk;
  const double c3 = (m[k] + m[k + 1] - 2.0 * delta[k]) / (hk * hk);
  return ys[k] + s * (m[k] + s * (c2 + s * c3));
}

}  // namespace

TEST_CASE("all published knots are reproduced to 1e-9") {
  const CurveSet& c = CurveSet::defaults();
  for (std::size_t i = 0; i < kActiveX.size(); ++i) {
    CHECK(std::abs(c.active_fl.value(kActiveX[i]) - kActiveY[i]) <= 1e-9);
  }
  for (std::size_t i = 0; i < kPassiveX.size(); ++i) {
    CHECK(std::abs(c.passive_fl.value(kPassiveX[i]) - kPassiveY[i]) <= 1e-9);
  }
  for (std::size_t i = 0; i < kFvX.size(); ++i) {
    CHECK(std::abs(c.fv.value(kFvX[i]) - kFvY[i]) <= 1e-9);
  }
}

TEST_CASE("fv(0) is exactly 1") {
  CHECK(CurveSet::defaults().fv.value(0.0) == 1.0);
}

TEST_CASE("active curve is non-negative and zero outside its support") {
  const CurveSet& c = CurveSet::defaults();
  for (double x = -6.0; x <= 6.0; x += 0.001) {
    CHECK(c.active_fl.value(x) >= 0.0);
  }
  CHECK(c.active_fl.value(0.2) == 0.0);
  CHECK(c.active_fl.value(1.9) == 0.0);
}

TEST_CASE("passive curve is non-negative and non-decreasing for x >= 1") {
  const CurveSet& c = CurveSet::defaults();
  double prev = c.passive_fl.value(1.0);
  CHECK(prev >= 0.0);
  for (double x = 1.0005; x <= 2.0; x += 0.0005) {
    const double v = c.passive_fl.value(x);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
}

TEST_CASE("curve evaluation matches the independently coded evaluator") {
  const CurveSet& c = CurveSet::defaults();
  for (double x = 0.35; x <= 1.75; x += 0.0107) {
    CHECK(c.active_fl.value(x) ==
          doctest::Approx(oracle_eval(kActiveX, kActiveY, x)).epsilon(1e-12));
    CHECK(c.passive_fl.value(x) ==
          doctest::Approx(oracle_eval(kPassiveX, kPassiveY, x)).epsilon(1e-12));
  }
  for (double v = -1.1; v <= 1.1; v += 0.0107) {
    CHECK(c.fv.value(v) == doctest::Approx(oracle_eval(kFvX, kFvY, v)).epsilon(1e-12));
  }
}

TEST_CASE("tendon force-strain piecewise values") {
  CHECK(tendon_force_norm(0.0) == 0.0);
  CHECK(tendon_force_norm(-0.01) == 0.0);
  // Linear branch: 37.5 * 0.02 - 0.2375.
  CHECK(tendon_force_norm(0.02) == doctest::Approx(0.5125).epsilon(1e-12));
}

TEST_CASE("tendon branches agree at the 1.27% cut-off to 1e-4") {
  const double linear = 37.5 * 0.0127 - 0.2375;
  const double toe = 0.06142 * std::expm1(124.929 * 0.0127);
  CHECK(std::abs(linear - toe) <= 1e-4);
  CHECK(tendon_force_norm(0.0127) == toe);
  CHECK(std::abs(tendon_force_norm(0.0127 + 1e-12) - linear) <= 1e-9);
}

TEST_CASE("inverse_tendon_strain inverts the force law on both branches") {
  for (double eps = 1e-4; eps <= 0.05; eps += 1e-3) {
    const double f = tendon_force_norm(eps);
    CHECK(inverse_tendon_strain(f) == doctest::Approx(eps).epsilon(1e-9));
  }
  CHECK(inverse_tendon_strain(0.0) == 0.0);
  CHECK(inverse_tendon_strain(-1.0) == 0.0);
}
