#include "nmbc/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "nmbc/curves.hpp"
#include "nmbc/errors.hpp"
#include "nmbc/log.hpp"
#include "nmbc/muscle.hpp"
#include "nmbc/torque.hpp"

namespace nmbc {

std::vector<PretuneSample> make_pretune_samples(const ModelDef& unscaled,
                                                const std::string& mtu,
                                                const GeometrySurrogate& scaled) {
  const MtuDef* def = unscaled.find_mtu(mtu);
  if (!def) throw ParseError("make_pretune_samples: unknown MTU '" + mtu + "'");
  const auto& surr = unscaled.surrogate(mtu);
  if (scaled.dofs() != surr.dofs()) {
    throw ParseError("make_pretune_samples: scaled geometry DOFs do not match MTU '" + mtu +
                     "'");
  }

  std::vector<PretuneSample> out;
  constexpr int kPoses = 11;
  for (int i = 0; i < kPoses; ++i) {
    const double frac = double(i) / (kPoses - 1);
    PretuneSample s;
    s.angles.resize(static_cast<Eigen::Index>(def->spanned_joints.size()));
    for (std::size_t d = 0; d < def->spanned_joints.size(); ++d) {
      const auto& j =
          unscaled.joints[static_cast<std::size_t>(unscaled.joint_index(def->spanned_joints[d]))];
      s.angles[static_cast<Eigen::Index>(d)] = j.angle_min + frac * (j.angle_max - j.angle_min);
    }
    const std::span<const double> view(s.angles.data(), static_cast<std::size_t>(s.angles.size()));
    s.lmt_scaled = scaled.lmt(view);

    const double lmt_unscaled = surr.lmt(view);
    const MtuState st =
        solve_equilibrium(lmt_unscaled, 0.0, 1.0, def->params, CurveSet::defaults());
    s.lnorm_unscaled = st.fiber_length / def->params.l_opt;
    s.alpha = st.pennation_rad;
    s.fnorm_max = (st.f_active + st.f_passive) / def->params.f_max_iso;
    out.push_back(std::move(s));
  }
  return out;
}

double pretune_predicted_lmt(const PretuneSample& s, double l_opt, double l_slack) {
  const double eps = inverse_tendon_strain(std::max(0.0, s.fnorm_max * std::cos(s.alpha)));
  return l_slack * (1.0 + eps) + l_opt * s.lnorm_unscaled * std::cos(s.alpha);
}

namespace {

double pretune_objective(const std::vector<PretuneSample>& samples, double l_opt,
                         double l_slack) {
  double sum = 0.0;
  for (const auto& s : samples) {
    const double d = s.lmt_scaled - pretune_predicted_lmt(s, l_opt, l_slack);
    sum += d * d;
  }
  return sum;
}

}  // namespace

PretuneResult pretune(const std::vector<PretuneSample>& samples, const MtuParams& init) {
  if (samples.size() != 11) {
    throw std::invalid_argument("pretune expects the 11 standard poses, got " +
                                std::to_string(samples.size()));
  }
  init.validate("pretune");

  const Eigen::Vector2d lo(0.5 * init.l_opt, 0.5 * init.l_slack);
  const Eigen::Vector2d hi(2.0 * init.l_opt, 2.0 * init.l_slack);
  int evals = 0;
  auto obj = [&](Eigen::Vector2d p) {
    p = p.cwiseMax(lo).cwiseMin(hi);
    ++evals;
    return pretune_objective(samples, p[0], p[1]);
  };
  auto clamp_pt = [&](Eigen::Vector2d p) { return p.cwiseMax(lo).cwiseMin(hi).eval(); };

  // Plain Nelder-Mead on the 2-D box-clamped problem.
  std::array<Eigen::Vector2d, 3> x = {
      Eigen::Vector2d(init.l_opt, init.l_slack),
      clamp_pt({init.l_opt * 1.05, init.l_slack}),
      clamp_pt({init.l_opt, init.l_slack * 1.05}),
  };
  std::array<double, 3> f = {obj(x[0]), obj(x[1]), obj(x[2])};

  constexpr int kMaxIter = 500;
  bool converged = false;
  for (int it = 0; it < kMaxIter; ++it) {
    std::array<int, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return f[a] < f[b]; });
    std::array<Eigen::Vector2d, 3> xs;
    std::array<double, 3> fs;
    for (int k = 0; k < 3; ++k) {
      xs[k] = x[order[k]];
      fs[k] = f[order[k]];
    }
    x = xs;
    f = fs;

    const double spread = (x[2] - x[0]).norm() / std::max(1e-30, x[0].norm());
    if (spread < 1e-12 && std::abs(f[2] - f[0]) < 1e-18 + 1e-10 * f[0]) {
      converged = true;
      break;
    }

    const Eigen::Vector2d centroid = 0.5 * (x[0] + x[1]);
    const Eigen::Vector2d xr = clamp_pt(centroid + (centroid - x[2]));
    const double fr = obj(xr);
    if (fr < f[0]) {
      const Eigen::Vector2d xe = clamp_pt(centroid + 2.0 * (centroid - x[2]));
      const double fe = obj(xe);
      if (fe < fr) {
        x[2] = xe;
        f[2] = fe;
      } else {
        x[2] = xr;
        f[2] = fr;
      }
    } else if (fr < f[1]) {
      x[2] = xr;
      f[2] = fr;
    } else {
      const Eigen::Vector2d xc = clamp_pt(centroid + 0.5 * (x[2] - centroid));
      const double fc = obj(xc);
      if (fc < f[2]) {
        x[2] = xc;
        f[2] = fc;
      } else {
        x[1] = clamp_pt(x[0] + 0.5 * (x[1] - x[0]));
        x[2] = clamp_pt(x[0] + 0.5 * (x[2] - x[0]));
        f[1] = obj(x[1]);
        f[2] = obj(x[2]);
      }
    }
  }

  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) { return f[a] < f[b]; });
  PretuneResult res;
  res.l_opt = x[order[0]][0];
  res.l_slack = x[order[0]][1];
  res.objective = f[order[0]];
  res.converged = converged;
  res.evals = evals;
  if (!converged) log_warn("pretune: Nelder-Mead budget exhausted; returning best point");
  return res;
}

CalibrationDataset load_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw ParseError("cannot open dataset manifest: " + manifest_path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(manifest_path.string() + ": " + e.what());
  }

  CalibrationDataset ds;
  if (!j.contains("dofs") || !j.at("dofs").is_array() || j.at("dofs").empty()) {
    throw ParseError(manifest_path.string() + ": 'dofs' must be a non-empty array");
  }
  for (const auto& d : j.at("dofs")) ds.dofs.push_back(d.get<std::string>());
  if (!j.contains("trials") || j.at("trials").empty()) {
    throw ParseError(manifest_path.string() + ": 'trials' must be a non-empty array");
  }
  for (const auto& t : j.at("trials")) {
    CalibrationTrial trial;
    trial.angles = load_trace(dir / t.at("angles").get<std::string>());
    trial.emg = load_trace(dir / t.at("emg").get<std::string>());
    trial.tau_id = load_trace(dir / t.at("tau").get<std::string>(), ds.dofs);
    const auto check = [&](const Trace& a, const char* what) {
      if (a.rows() != trial.angles.rows() ||
          (a.time - trial.angles.time).cwiseAbs().maxCoeff() > 1e-9) {
        throw ParseError("dataset trial: " + std::string(what) +
                         " trace is not time-aligned with the angle trace");
      }
    };
    check(trial.emg, "EMG");
    check(trial.tau_id, "torque");
    ds.trials.push_back(std::move(trial));
  }
  return ds;
}

namespace {

ModelDef with_params(const ModelDef& base, const std::vector<MtuParams>& params) {
  if (params.size() != base.mtus.size()) {
    throw std::invalid_argument("calibration: params size does not match model MTU count");
  }
  ModelDef m = base;
  for (std::size_t i = 0; i < params.size(); ++i) m.mtus[i].params = params[i];
  return m;
}

}  // namespace

double calibration_objective(const CalibrationDataset& ds, const ModelDef& model) {
  if (ds.trials.empty() || ds.dofs.empty()) {
    throw std::invalid_argument("calibration dataset is empty");
  }
  double sum = 0.0;
  long count = 0;
  for (std::size_t ti = 0; ti < ds.trials.size(); ++ti) {
    const auto& trial = ds.trials[ti];
    const double dt = sample_interval(trial.angles);
    Trace torques;
    try {
      torques = run_pipeline(model, trial.emg, trial.angles, AssistanceConfig{}, 1.0 / dt);
    } catch (const NumericalError& e) {
      throw NumericalError("calibration objective, trial " + std::to_string(ti + 1) + ": " +
                           e.what());
    }
    for (const auto& dof : ds.dofs) {
      const Eigen::VectorXd pred = torques.col(dof + "_tau_bio");
      const Eigen::VectorXd id = trial.tau_id.col(dof);
      const Eigen::Index n = std::min(pred.size(), id.size());
      sum += (pred.head(n) - id.head(n)).squaredNorm();
      count += n;
    }
  }
  return sum / double(count);
}

double calibration_objective(const CalibrationDataset& ds, const ModelDef& base,
                             const std::vector<MtuParams>& params) {
  return calibration_objective(ds, with_params(base, params));
}

CalibrationResult calibrate_sa(const CalibrationDataset& ds, const ModelDef& model,
                               const SaOptions& opts) {
  const std::size_t n_mtu = model.mtus.size();
  const std::size_t dim = 4 * n_mtu;

  // Parameter vector x: per MTU [E, F scale, l_opt, l_slack].
  Eigen::VectorXd lo(dim), hi(dim), x(dim);
  std::vector<double> f_nominal(n_mtu);
  for (std::size_t i = 0; i < n_mtu; ++i) {
    const MtuParams& p = model.mtus[i].params;
    f_nominal[i] = p.f_max_iso;
    lo[4 * i + 0] = -3.0;
    hi[4 * i + 0] = -1e-3;
    lo[4 * i + 1] = 0.5;
    hi[4 * i + 1] = 1.5;
    lo[4 * i + 2] = 0.975 * p.l_opt;
    hi[4 * i + 2] = 1.025 * p.l_opt;
    lo[4 * i + 3] = 0.95 * p.l_slack;
    hi[4 * i + 3] = 1.05 * p.l_slack;
    x[4 * i + 0] = std::clamp(p.shape_factor_E, lo[4 * i + 0], hi[4 * i + 0]);
    x[4 * i + 1] = 1.0;
    x[4 * i + 2] = p.l_opt;
    x[4 * i + 3] = p.l_slack;
  }

  auto to_params = [&](const Eigen::VectorXd& v) {
    std::vector<MtuParams> params(n_mtu);
    for (std::size_t i = 0; i < n_mtu; ++i) {
      params[i] = model.mtus[i].params;
      params[i].shape_factor_E = v[4 * i + 0];
      params[i].f_max_iso = v[4 * i + 1] * f_nominal[i];
      params[i].l_opt = v[4 * i + 2];
      params[i].l_slack = v[4 * i + 3];
    }
    return params;
  };

  long evals = 0;
  auto cost = [&](const Eigen::VectorXd& v) {
    ++evals;
    return calibration_objective(ds, model, to_params(v));
  };

  CalibrationResult res;
  double fx = cost(x);
  res.initial_objective = fx;
  Eigen::VectorXd best_x = x;
  double best_f = fx;
  res.objective_history.push_back(best_f);

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  double temp = opts.t0 > 0.0 ? opts.t0 : std::max(1e-12, fx);
  Eigen::VectorXd step = 0.25 * (hi - lo);
  Eigen::VectorXi accepted = Eigen::VectorXi::Zero(static_cast<Eigen::Index>(dim));

  int stall = 0;
  bool exhausted = false;
  while (!exhausted) {
    const double best_before = best_f;
    int cycles_done = 0;
    for (int cycle = 0; cycle < opts.cycles_per_temp && !exhausted; ++cycle) {
      for (std::size_t h = 0; h < dim; ++h) {
        if (evals >= opts.max_evals) {
          exhausted = true;
          break;
        }
        Eigen::VectorXd cand = x;
        const double r = 2.0 * unit(rng) - 1.0;
        cand[h] = std::clamp(x[h] + r * step[h], lo[h], hi[h]);
        const double fc = cost(cand);
        const bool accept = fc <= fx || unit(rng) < std::exp((fx - fc) / temp);
        if (accept) {
          x = cand;
          fx = fc;
          accepted[static_cast<Eigen::Index>(h)] += 1;
          if (fx < best_f) {
            best_f = fx;
            best_x = x;
          }
        }
      }
      ++cycles_done;
      if (cycles_done % opts.step_adjust_every == 0) {
        // Corana step update: keep per-dimension acceptance near 50%.
        for (std::size_t h = 0; h < dim; ++h) {
          const double ratio = double(accepted[static_cast<Eigen::Index>(h)]) /
                               double(opts.step_adjust_every);
          if (ratio > 0.6) {
            step[h] *= 1.0 + 2.0 * (ratio - 0.6) / 0.4;
          } else if (ratio < 0.4) {
            step[h] /= 1.0 + 2.0 * (0.4 - ratio) / 0.4;
          }
          step[h] = std::min(step[h], hi[h] - lo[h]);
        }
        accepted.setZero();
      }
    }

    temp *= opts.cooling;
    x = best_x;  // restart each temperature from the best point seen
    fx = best_f;
    res.objective_history.push_back(best_f);
    stall = best_before - best_f < opts.stall_eps ? stall + 1 : 0;
    if (stall >= opts.stall_temps) break;
  }

  if (exhausted) log_warn("calibrate_sa: evaluation budget exhausted; returning best point");

  res.params = to_params(best_x);
  res.final_objective = best_f;
  res.evals = evals;
  res.budget_exhausted = exhausted;

  // Final per-DOF torque RMSE at the calibrated parameters.
  const ModelDef calibrated = with_params(model, res.params);
  const auto n_dofs = static_cast<Eigen::Index>(ds.dofs.size());
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(n_dofs);
  Eigen::VectorXd cnt = Eigen::VectorXd::Zero(n_dofs);
  for (const auto& trial : ds.trials) {
    const double dt = sample_interval(trial.angles);
    const Trace torques =
        run_pipeline(calibrated, trial.emg, trial.angles, AssistanceConfig{}, 1.0 / dt);
    for (Eigen::Index d = 0; d < n_dofs; ++d) {
      const Eigen::VectorXd pred = torques.col(ds.dofs[d] + "_tau_bio");
      const Eigen::VectorXd id = trial.tau_id.col(ds.dofs[d]);
      const Eigen::Index n = std::min(pred.size(), id.size());
      sq[d] += (pred.head(n) - id.head(n)).squaredNorm();
      cnt[d] += double(n);
    }
  }
  res.rmse_per_dof = (sq.array() / cnt.array()).sqrt();
  return res;
}

}  // namespace nmbc
