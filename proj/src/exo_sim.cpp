#include "nmbc/exo_sim.hpp"

#include <algorithm>
#include <cmath>

#include "nmbc/errors.hpp"
#include "nmbc/filters.hpp"

namespace nmbc {

void SeaPlant::validate() const {
  if (!(spring_k > 0.0 && gear_ratio > 0.0 && motor_inertia > 0.0 && torque_limit > 0.0 &&
        speed_limit > 0.0 && dt > 0.0)) {
    throw std::invalid_argument("SeaPlant: all constants must be positive");
  }
}

void DobController::validate(const SeaPlant& plant) const {
  if (!(kp >= 0.0 && kd >= 0.0)) throw std::invalid_argument("DobController: negative gains");
  if (!(q_cutoff_hz > 0.0 && q_cutoff_hz < 0.5 / plant.dt)) {
    throw std::invalid_argument("DobController: Q cutoff must be positive and below Nyquist");
  }
}

namespace {

struct Loop {
  const SeaPlant& plant;
  const DobController& ctrl;
  LowPass2 q_filter;
  double j_nom, k_nom;   // observer's nominal model
  double phi = 0.0;      // motor position, output side, rad
  double omega = 0.0;    // motor velocity, rad/s
  double tau_dist = 0.0; // current disturbance estimate
  double prev_err = 0.0;
  double tau_exo_h1 = 0.0, tau_exo_h2 = 0.0;  // spring torque history
  double tau_m_prev = 0.0;
  long k = 0;

  Loop(const SeaPlant& p, const DobController& c)
      : plant(p),
        ctrl(c),
        q_filter(c.q_cutoff_hz, 1.0 / p.dt),
        j_nom(c.nominal_inertia > 0.0 ? c.nominal_inertia : p.motor_inertia),
        k_nom(c.nominal_spring_k > 0.0 ? c.nominal_spring_k : p.spring_k) {}

  double tau_exo(double theta_joint) const { return plant.spring_k * (phi - theta_joint); }

  // One 1 ms control + plant step. Returns the commanded motor torque.
  double step(double tau_ref, double theta_joint) {
    const double dt = plant.dt;
    const double t_exo = tau_exo(theta_joint);

    // Inner loop tracks the reference; the observed disturbance is
    // subtracted from the torque handed to the motor.
    const double err = tau_ref - t_exo;
    const double derr = k == 0 ? 0.0 : (err - prev_err) / dt;
    prev_err = err;
    double tau_m = tau_ref + ctrl.kp * err + ctrl.kd * derr;
    if (ctrl.dob_enabled) tau_m -= tau_dist;
    tau_m = std::clamp(tau_m, -plant.torque_limit, plant.torque_limit);

    // DOB: P_n^{-1}(tau_exo) - tau_m through the Q filter, with
    // P_n^{-1} y = (J/k) y'' + y  (rigid motor inertia behind the spring).
    if (k >= 2) {
      const double ddt_exo = (t_exo - 2.0 * tau_exo_h1 + tau_exo_h2) / (dt * dt);
      const double raw = (j_nom / k_nom) * ddt_exo + t_exo - tau_m_prev;
      tau_dist = q_filter.step(raw);
    } else {
      tau_dist = q_filter.step(0.0);
    }
    tau_exo_h2 = tau_exo_h1;
    tau_exo_h1 = t_exo;
    tau_m_prev = tau_m;

    // Semi-implicit Euler on the motor side with speed saturation.
    omega += dt * (tau_m - t_exo) / plant.motor_inertia;
    omega = std::clamp(omega, -plant.speed_limit, plant.speed_limit);
    phi += dt * omega;
    ++k;
    return tau_m;
  }
};

SimResult run_loop(const SeaPlant& plant, const DobController& ctrl, const Trace& tau_ref,
                   const PassiveEnv* env, const Trace* joint_motion) {
  plant.validate();
  ctrl.validate(plant);
  const double dt_trace = sample_interval(tau_ref);
  if (std::abs(dt_trace - plant.dt) > 1e-9) {
    throw ParseError("reference trace must be sampled at the plant rate");
  }
  if (tau_ref.duration() < 1.0 - 1e-9) {
    throw ParseError("simulation requires at least 1 s of reference");
  }
  const Eigen::VectorXd ref = tau_ref.col("tau_ref");

  Eigen::VectorXd theta;
  if (joint_motion) {
    if (joint_motion->rows() != tau_ref.rows() ||
        (joint_motion->time - tau_ref.time).cwiseAbs().maxCoeff() > 1e-9) {
      throw ParseError("joint motion and reference traces are not aligned");
    }
    theta = joint_motion->col("angle");
  }

  Loop loop(plant, ctrl);
  double th = 0.0, th_dot = 0.0;  // passive environment state

  SimResult res;
  res.series.time = tau_ref.time;
  res.series.channels = {"tau_ref", "tau_exo", "tau_dist", "angle"};
  res.series.values.resize(tau_ref.rows(), 4);

  double sq = 0.0;
  for (Eigen::Index i = 0; i < tau_ref.rows(); ++i) {
    const double theta_joint = joint_motion ? theta[i] : th;
    const double t_exo = loop.tau_exo(theta_joint);
    if (std::abs(t_exo) > 10.0 * plant.torque_limit) {
      throw NumericalError("exo-sim diverged at t = " + std::to_string(tau_ref.time[i]) +
                           " s (|tau_exo| = " + std::to_string(std::abs(t_exo)) + " N*m)");
    }
    res.series.values(i, 0) = ref[i];
    res.series.values(i, 1) = t_exo;
    res.series.values(i, 2) = loop.tau_dist;
    res.series.values(i, 3) = theta_joint;
    const double e = ref[i] - t_exo;
    sq += e * e;

    loop.step(ref[i], theta_joint);

    if (env) {
      // Spring torque drives the passive load.
      const double acc = (t_exo - env->stiffness * th - env->damping * th_dot) / env->inertia;
      th_dot += plant.dt * acc;
      th += plant.dt * th_dot;
    }
  }
  res.tracking_rms = std::sqrt(sq / double(tau_ref.rows()));
  return res;
}

}  // namespace

SimResult simulate(const SeaPlant& plant, const DobController& ctrl, const Trace& tau_ref,
                   const Trace& joint_motion) {
  return run_loop(plant, ctrl, tau_ref, nullptr, &joint_motion);
}

SimResult simulate_passive_env(const SeaPlant& plant, const DobController& ctrl,
                               const Trace& tau_ref, const PassiveEnv& env) {
  if (!(env.inertia > 0.0 && env.stiffness >= 0.0 && env.damping >= 0.0)) {
    throw std::invalid_argument("PassiveEnv: inertia must be positive, stiffness/damping >= 0");
  }
  return run_loop(plant, ctrl, tau_ref, &env, nullptr);
}

double transparency_metric(const SimResult& res) {
  const Eigen::VectorXd ref = res.series.col("tau_ref");
  if (ref.cwiseAbs().maxCoeff() > 0.0) {
    throw std::invalid_argument("transparency_metric expects a zero-reference run");
  }
  const Eigen::VectorXd exo = res.series.col("tau_exo");
  return std::sqrt(exo.squaredNorm() / double(exo.size()));
}

}  // namespace nmbc
