#pragma once

#include <optional>

#include "nmbc/curves.hpp"
#include "nmbc/filters.hpp"
#include "nmbc/model.hpp"

namespace nmbc {

/// Tendon strain (L^T - L_slack) / L_slack.
double tendon_strain(double l_tendon, double l_slack);

/// Pennation angle under the constant-thickness assumption,
/// arcsin(L_opt sin(alpha_opt) / L^M); the arcsin argument is clamped to 1
/// for fibers shorter than the muscle thickness.
double pennation(double fiber_length, const MtuParams& p);

struct FiberForce {
  double active = 0.0;   // N, F_max * fl_a(l) * fv(v) * a
  double passive = 0.0;  // N, F_max * (fl_p(l) + D_M * v)
  double total = 0.0;    // N, floored at zero (tendons cannot push)
};

/// Hill-type fiber force from normalized fiber length, normalized fiber
/// velocity (by 10 * L_opt per second), and activation.
FiberForce fiber_force_parts(double l_norm, double v_norm, double a, const MtuParams& p,
                             const CurveSet& c);
double fiber_force(double l_norm, double v_norm, double a, const MtuParams& p,
                   const CurveSet& c);

enum class SolveStatus {
  kConverged,         // residual within tolerance
  kBoundaryFallback,  // no root bracketed; stiff-tendon geometric solution
};

struct MtuState {
  double lmt = 0.0;                  // m
  double fiber_length = 0.0;         // m
  double fiber_velocity_norm = 0.0;  // by 10 * L_opt / s
  double pennation_rad = 0.0;
  double tendon_strain = 0.0;
  double f_mtu = 0.0;     // N, tendon force == MTU force
  double f_active = 0.0;  // N
  double f_passive = 0.0; // N
  SolveStatus status = SolveStatus::kConverged;
  double residual = 0.0;  // N at the returned fiber length
  int iterations = 0;
};

/// Solves F^T(strain(lmt - L^M cos a)) = F^M(L^M) cos a for the fiber length
/// with the Brent-Dekker method over L^M in [0.3, 1.8] * L_opt (expanded once
/// toward the stiff-tendon solution when the initial bracket has no sign
/// change). `tol_n` defaults to 1e-6 * F_max. Throws NumericalError if the
/// iteration budget is exhausted.
MtuState solve_equilibrium(double lmt, double v_norm, double a, const MtuParams& p,
                           const CurveSet& c, double tol_n = -1.0);

/// Streaming per-MTU stepper. Owns the fiber-velocity estimate: a backward
/// difference of the two previous equilibrium fiber lengths, low-pass
/// filtered at 20 Hz and normalized by 10 * L_opt. One instance per stream.
class MtuSim {
 public:
  explicit MtuSim(const MtuParams& p, const CurveSet* curves = &CurveSet::defaults());

  MtuState step(double lmt, double a, double dt);
  void reset();

  const MtuParams& params() const { return params_; }

 private:
  MtuParams params_;
  const CurveSet* curves_;
  std::optional<LowPass2> vel_filter_;
  double dt_ = 0.0;
  double prev_lm_ = 0.0, prev_prev_lm_ = 0.0;
  int history_ = 0;
};

}  // namespace nmbc
