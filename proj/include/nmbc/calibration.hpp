#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "nmbc/model.hpp"
#include "nmbc/trace.hpp"

namespace nmbc {

/// One of the eleven poses used by the length pre-tuning step: the
/// scaled-model muscle-tendon length plus the unscaled model's normalized
/// operating point at maximal activation.
struct PretuneSample {
  Eigen::VectorXd angles;        // rad, per spanned DOF
  double lmt_scaled = 0.0;       // m, from the scaled geometry
  double lnorm_unscaled = 0.0;   // fiber length / L_opt from the unscaled model
  double fnorm_max = 0.0;        // normalized fiber force at a = 1
  double alpha = 0.0;            // rad
};

/// Builds the 11 equally spaced poses across the spanned joints' ranges.
/// For a two-DOF MTU the poses sweep both ranges together. The normalized
/// quantities come from equilibrium solves of the unscaled model at maximal
/// activation; lengths come from `scaled` (pass the model's own surrogate
/// for a scale factor of 1).
std::vector<PretuneSample> make_pretune_samples(const ModelDef& unscaled,
                                                const std::string& mtu,
                                                const GeometrySurrogate& scaled);

struct PretuneResult {
  double l_opt = 0.0;
  double l_slack = 0.0;
  double objective = 0.0;  // m^2
  bool converged = false;
  int evals = 0;
};

/// Predicted muscle-tendon length at one pose for candidate lengths:
/// L_slack * (1 + eps_T) + L_opt * lnorm * cos(alpha), with eps_T inverted
/// from the tendon law at the sample's normalized force.
double pretune_predicted_lmt(const PretuneSample& s, double l_opt, double l_slack);

/// Minimizes the sum of squared length differences over the 11 poses with a
/// bounded Nelder-Mead search (box: [0.5, 2] times the initial lengths).
/// Returns the best point found with `converged` false when the iteration
/// budget ran out.
PretuneResult pretune(const std::vector<PretuneSample>& samples, const MtuParams& init);

struct CalibrationTrial {
  Trace angles;
  Trace emg;
  Trace tau_id;  // per calibrated DOF
};

struct CalibrationDataset {
  std::vector<CalibrationTrial> trials;
  std::vector<std::string> dofs;  // joint names with experimental torques
};

/// Directory with a manifest.json naming per-trial CSV triples.
CalibrationDataset load_dataset(const std::filesystem::path& dir);

/// Mean squared torque error (N*m)^2 across all rows, DOFs and trials,
/// running the full forward pipeline at each trial's native rate with
/// `params` applied over `base` (model order).
double calibration_objective(const CalibrationDataset& ds, const ModelDef& base,
                             const std::vector<MtuParams>& params);
double calibration_objective(const CalibrationDataset& ds, const ModelDef& model);

struct SaOptions {
  std::uint64_t seed = 0;
  double t0 = -1.0;            // initial temperature; <= 0 picks it from the start cost
  double cooling = 0.85;       // geometric factor per temperature level
  int cycles_per_temp = 20;    // full passes over the parameter vector
  int step_adjust_every = 5;   // cycles between Corana step-size updates
  double stall_eps = 1e-6;     // minimum improvement of the best cost
  int stall_temps = 4;         // temperatures without improvement before stopping
  long max_evals = 100000;
};

struct CalibrationResult {
  std::vector<MtuParams> params;         // model MTU order
  std::vector<double> objective_history; // best cost after each temperature
  double initial_objective = 0.0;
  double final_objective = 0.0;
  Eigen::VectorXd rmse_per_dof;          // N*m
  long evals = 0;
  bool budget_exhausted = false;
};

/// Box-constrained simulated annealing over {E, F scale, L_opt, L_slack}
/// per MTU. Boxes: E in [-3, -1e-3], F scale in [0.5, 1.5] of the model's
/// nominal F_max, L_opt within +-2.5% and L_slack within +-5% of the
/// (pretuned) model lengths. Deterministic for a fixed seed.
CalibrationResult calibrate_sa(const CalibrationDataset& ds, const ModelDef& model,
                               const SaOptions& opts);

}  // namespace nmbc
