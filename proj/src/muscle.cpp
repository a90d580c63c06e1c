#include "nmbc/muscle.hpp"

#include <algorithm>
#include <cmath>

#include "nmbc/errors.hpp"

namespace nmbc {

double tendon_strain(double l_tendon, double l_slack) {
  if (!(l_slack > 0.0)) throw std::invalid_argument("tendon_strain: l_slack must be positive");
  return (l_tendon - l_slack) / l_slack;
}

double pennation(double fiber_length, const MtuParams& p) {
  if (!(fiber_length > 0.0)) {
    throw std::invalid_argument("pennation: fiber length must be positive");
  }
  if (p.alpha_opt == 0.0) return 0.0;
  const double arg = p.l_opt * std::sin(p.alpha_opt) / fiber_length;
  return std::asin(std::min(arg, 1.0));
}

FiberForce fiber_force_parts(double l_norm, double v_norm, double a, const MtuParams& p,
                             const CurveSet& c) {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw std::invalid_argument("fiber_force: activation must be in [0, 1]");
  }
  FiberForce f;
  f.active = p.f_max_iso * c.active_fl.value(l_norm) * c.fv.value(v_norm) * a;
  f.passive = p.f_max_iso * (c.passive_fl.value(l_norm) + p.damping_dm * v_norm);
  f.total = std::max(0.0, f.active + f.passive);
  return f;
}

double fiber_force(double l_norm, double v_norm, double a, const MtuParams& p,
                   const CurveSet& c) {
  return fiber_force_parts(l_norm, v_norm, a, p, c).total;
}

namespace {

struct Residual {
  double lmt, v_norm, a;
  const MtuParams& p;
  const CurveSet& c;

  // F^T - F^M cos(alpha) at the candidate fiber length: positive when the
  // tendon pulls harder than the fibers can hold.
  double operator()(double lm) const {
    const double alpha = pennation(lm, p);
    const double cos_a = std::cos(alpha);
    const double strain = tendon_strain(lmt - lm * cos_a, p.l_slack);
    const double f_t = p.f_max_iso * tendon_force_norm(strain);
    const double f_m = fiber_force(lm / p.l_opt, v_norm, a, p, c);
    return f_t - f_m * cos_a;
  }
};

// Fiber length in the rigid-tendon limit: tendon pinned at slack length,
// constant-thickness pennation geometry.
double stiff_tendon_fiber_length(double lmt, const MtuParams& p) {
  const double along = std::max(lmt - p.l_slack, 0.0);
  const double thick = p.l_opt * std::sin(p.alpha_opt);
  return std::sqrt(along * along + thick * thick);
}

// Classic Brent-Dekker root bisection/secant/inverse-quadratic hybrid.
// Returns the best abscissa; iterations taken via out-param.
double brent(const Residual& f, double a, double b, double fa, double fb, double f_tol,
             int max_iter, int* iters) {
  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int it = 0; it < max_iter; ++it) {
    *iters = it + 1;
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * 1e-16 * std::abs(b) + 1e-14;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || std::abs(fb) <= f_tol) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      // inverse quadratic / secant step
      const double s = fb / fa;
      double pq, qq;
      if (a == c) {
        pq = 2.0 * xm * s;
        qq = 1.0 - s;
      } else {
        const double q = fa / fc;
        const double r = fb / fc;
        pq = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        qq = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (pq > 0.0) qq = -qq;
      pq = std::abs(pq);
      if (2.0 * pq < std::min(3.0 * xm * qq - std::abs(tol1 * qq), std::abs(e * qq))) {
        e = d;
        d = pq / qq;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
  }
  throw NumericalError("equilibrium solver did not converge; residual " + std::to_string(fb));
}

MtuState make_state(double lmt, double lm, double v_norm, double a, const MtuParams& p,
                    const CurveSet& c, SolveStatus status, double residual, int iters) {
  MtuState s;
  s.lmt = lmt;
  s.fiber_length = lm;
  s.fiber_velocity_norm = v_norm;
  s.pennation_rad = pennation(lm, p);
  const double cos_a = std::cos(s.pennation_rad);
  s.tendon_strain = tendon_strain(lmt - lm * cos_a, p.l_slack);
  s.f_mtu = p.f_max_iso * tendon_force_norm(s.tendon_strain);
  const FiberForce ff = fiber_force_parts(lm / p.l_opt, v_norm, a, p, c);
  s.f_active = ff.active;
  s.f_passive = ff.passive;
  s.status = status;
  s.residual = residual;
  s.iterations = iters;
  return s;
}

}  // namespace

MtuState solve_equilibrium(double lmt, double v_norm, double a, const MtuParams& p,
                           const CurveSet& c, double tol_n) {
  p.validate("solve_equilibrium");
  if (!(lmt > p.l_slack * 0.95)) {
    throw std::invalid_argument("solve_equilibrium: lmt below 0.95 * l_slack is not physical");
  }
  if (tol_n <= 0.0) tol_n = 1e-6 * p.f_max_iso;

  const Residual f{lmt, v_norm, a, p, c};
  double lo = 0.3 * p.l_opt;
  double hi = 1.8 * p.l_opt;
  double flo = f(lo);
  double fhi = f(hi);
  int iters = 0;

  if ((flo > 0.0) == (fhi > 0.0) && std::abs(flo) > tol_n && std::abs(fhi) > tol_n) {
    // Expand once toward the stiff-tendon solution before giving up.
    const double stiff = stiff_tendon_fiber_length(lmt, p);
    const double lo2 = std::min(lo, std::max(0.05 * p.l_opt, 0.9 * stiff));
    const double hi2 = std::max(hi, 1.1 * stiff);
    if (lo2 < lo) {
      const double v = f(lo2);
      if ((v > 0.0) != (fhi > 0.0)) {
        lo = lo2;
        flo = v;
      }
    }
    if ((flo > 0.0) == (fhi > 0.0) && hi2 > hi) {
      const double v = f(hi2);
      if ((v > 0.0) != (flo > 0.0)) {
        hi = hi2;
        fhi = v;
      }
    }
    if ((flo > 0.0) == (fhi > 0.0)) {
      const double lm = std::clamp(stiff, lo, hi);
      return make_state(lmt, lm, v_norm, a, p, c, SolveStatus::kBoundaryFallback, f(lm), 0);
    }
  }

  double root;
  if (std::abs(flo) <= tol_n) {
    root = lo;
  } else if (std::abs(fhi) <= tol_n) {
    root = hi;
  } else {
    root = brent(f, lo, hi, flo, fhi, tol_n, 100, &iters);
  }
  return make_state(lmt, root, v_norm, a, p, c, SolveStatus::kConverged, f(root), iters);
}

MtuSim::MtuSim(const MtuParams& p, const CurveSet* curves) : params_(p), curves_(curves) {
  params_.validate("MtuSim");
}

void MtuSim::reset() {
  vel_filter_.reset();
  dt_ = 0.0;
  prev_lm_ = prev_prev_lm_ = 0.0;
  history_ = 0;
}

MtuState MtuSim::step(double lmt, double a, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("MtuSim::step: dt must be positive");
  if (!vel_filter_) {
    dt_ = dt;
    // 20 Hz velocity smoothing; falls back to a quarter of Nyquist for
    // slow offline streams.
    const double fs = 1.0 / dt;
    vel_filter_.emplace(std::min(20.0, 0.25 * fs), fs);
  } else if (std::abs(dt - dt_) > 1e-9 * std::max(1.0, dt_)) {
    throw std::invalid_argument("MtuSim::step: dt changed mid-stream");
  }

  double v_raw = 0.0;
  if (history_ >= 2) v_raw = (prev_lm_ - prev_prev_lm_) / dt;
  const double v_norm = vel_filter_->step(v_raw) / (10.0 * params_.l_opt);

  const MtuState state = solve_equilibrium(lmt, v_norm, a, params_, *curves_);
  prev_prev_lm_ = prev_lm_;
  prev_lm_ = state.fiber_length;
  history_ = std::min(history_ + 1, 2);
  return state;
}

}  // namespace nmbc
