#pragma once

#include "nmbc/trace.hpp"

namespace nmbc {

/// Series-elastic actuator constants: motor (reflected through the 1:100
/// drive) behind a rotary spring, discretized at 1 kHz.
struct SeaPlant {
  double spring_k = 1534.0;      // N*m/rad
  double gear_ratio = 100.0;     // harmonic drive reduction
  double motor_inertia = 0.12;   // kg*m^2, reflected to the output side
  double torque_limit = 100.0;   // N*m, commanded motor torque saturation
  double speed_limit = 5.0;      // rad/s, output side
  double dt = 1e-3;              // s

  void validate() const;
};

/// Inner PD + feedforward loop on the spring torque with an outer
/// disturbance observer that estimates and cancels the torque induced by
/// joint motion. The Q filter is a discrete 2nd-order low-pass. The observer
/// inverts a nominal model (rigid motor inertia behind the spring); the
/// nominal constants default to the plant's own.
struct DobController {
  double kp = 3.0;
  double kd = 0.08;
  double q_cutoff_hz = 30.0;
  bool dob_enabled = true;
  double nominal_inertia = -1.0;   // kg*m^2; <= 0 uses the plant value
  double nominal_spring_k = -1.0;  // N*m/rad; <= 0 uses the plant value

  void validate(const SeaPlant& plant) const;
};

struct SimResult {
  Trace series;               // time, tau_ref, tau_exo, tau_dist, angle
  double tracking_rms = 0.0;  // N*m, RMS of tau_ref - tau_exo
};

/// Fixed-step simulation with the joint side kinematically prescribed by
/// `joint_motion` (channel "angle"). `tau_ref` (channel "tau_ref") and the
/// motion must share a uniform grid at the plant rate and last >= 1 s.
/// Throws NumericalError on divergence (|tau_exo| > 10x torque limit).
SimResult simulate(const SeaPlant& plant, const DobController& ctrl, const Trace& tau_ref,
                   const Trace& joint_motion);

/// Passive joint-side environment for interaction-stability checks.
struct PassiveEnv {
  double inertia = 0.1;    // kg*m^2
  double stiffness = 0.0;  // N*m/rad
  double damping = 1.0;    // N*m*s/rad
};

/// Same loop with the joint side driven by the spring torque against a
/// passive inertia-spring-damper environment.
SimResult simulate_passive_env(const SeaPlant& plant, const DobController& ctrl,
                               const Trace& tau_ref, const PassiveEnv& env);

/// Residual interaction torque in minimal-impedance mode: RMS of tau_exo
/// over a run whose reference was identically zero.
double transparency_metric(const SimResult& res);

}  // namespace nmbc
