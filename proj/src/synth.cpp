#include "nmbc/synth.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "nmbc/errors.hpp"
#include "nmbc/torque.hpp"

namespace nmbc {

namespace {

// Periodic raised-cosine bump at phase c with half-width w (phases in [0,1)).
double bump(double p, double c, double w) {
  double d = p - c;
  d -= std::floor(d + 0.5);  // wrap to [-0.5, 0.5)
  if (std::abs(d) >= w) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * d / w));
}

double ankle_angle(double p) {
  return -0.10 + 0.06 * std::sin(2.0 * std::numbers::pi * p) + 0.45 * bump(p, 0.55, 0.12);
}

double knee_angle(double p) { return 0.08 + 1.10 * bump(p, 0.72, 0.14); }

double emg_sol(double p) { return 0.03 + 0.45 * bump(p, 0.40, 0.20); }
double emg_ta(double p) {
  return 0.03 + 0.40 * bump(p, 0.00, 0.10) + 0.25 * bump(p, 0.85, 0.12);
}
double emg_gas_med(double p) { return 0.03 + 0.40 * bump(p, 0.38, 0.18); }
double emg_gas_lat(double p) { return 0.03 + 0.35 * bump(p, 0.36, 0.16); }

struct MtuSpec {
  std::string name;
  std::string emg;  // empty == unwired
  std::vector<std::string> joints;
  MtuParams nominal;
  // Ground-truth deviations: E, F scale, l_opt scale, l_slack scale.
  double true_e, true_fs, true_los, true_lss;
  // Geometry: lmt = l0 + c1*a1 + c2*a2 + q1*a1^2 + cx*a1*a2.
  double l0, c1, c2, q1, cx;
};

MtuParams nominal(double f, double lopt, double lslack, double alpha) {
  MtuParams p;
  p.shape_factor_E = -1.5;
  p.f_max_iso = f;
  p.l_opt = lopt;
  p.l_slack = lslack;
  p.alpha_opt = alpha;
  p.damping_dm = 0.1;
  return p;
}

std::vector<MtuSpec> layout_mtus(SynthSpec::Layout layout, const std::string& side) {
  const std::string ankle = "ankle_" + side;
  const std::string knee = "knee_" + side;

  std::vector<MtuSpec> m;
  m.push_back({"sol_" + side, "sol_" + side, {ankle},
               nominal(3000, 0.050, 0.250, 0.4363),
               -2.2, 1.25, 1.020, 0.970,
               0.2945, -0.045, 0.0, -0.004, 0.0});
  m.push_back({"ta_" + side, "ta_" + side, {ankle},
               nominal(1200, 0.098, 0.223, 0.0873),
               -1.2, 0.80, 0.985, 1.030,
               0.3200, 0.038, 0.0, 0.003, 0.0});
  if (layout == SynthSpec::Layout::kAnkle2) return m;

  m.push_back({"gas_med_" + side, "gas_med_" + side, {ankle, knee},
               nominal(1558, 0.060, 0.390, 0.2967),
               -1.9, 1.15, 1.015, 0.975,
               0.4490, -0.040, -0.018, -0.003, 0.004});
  m.push_back({"gas_lat_" + side, "gas_lat_" + side, {ankle, knee},
               nominal(683, 0.064, 0.385, 0.1396),
               -1.1, 0.90, 0.990, 1.020,
               0.4500, -0.038, -0.016, -0.003, 0.004});
  m.push_back({"per_long_" + side, "", {ankle},
               nominal(943, 0.049, 0.345, 0.1745),
               -1.5, 1.00, 1.000, 1.000,
               0.3940, -0.015, 0.0, -0.002, 0.0});
  m.push_back({"per_brev_" + side, "", {ankle},
               nominal(435, 0.050, 0.161, 0.0873),
               -1.5, 1.00, 1.000, 1.000,
               0.2120, -0.012, 0.0, -0.002, 0.0});
  m.push_back({"per_tert_" + side, "", {ankle},
               nominal(180, 0.079, 0.100, 0.2269),
               -1.5, 1.00, 1.000, 1.000,
               0.1790, 0.008, 0.0, 0.002, 0.0});
  return m;
}

GeometryGrid make_grid(const MtuSpec& spec) {
  GeometryGrid g;
  g.mtu = spec.name;
  g.dofs = spec.joints;

  auto linspace = [](double lo, double hi, int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * double(i) / double(n - 1);
    return v;
  };
  // Ankle grids span [-0.55, 0.65]; knee grids span [-0.10, 1.40].
  g.knots.push_back(linspace(-0.55, 0.65, 13));
  if (g.dofs.size() == 2) g.knots.push_back(linspace(-0.10, 1.40, 9));

  const Eigen::Index n1 = g.dofs.size() == 2 ? g.knots[1].size() : 1;
  g.lmt.resize(g.knots[0].size(), n1);
  for (Eigen::Index i = 0; i < g.knots[0].size(); ++i) {
    const double a1 = g.knots[0][i];
    for (Eigen::Index j = 0; j < n1; ++j) {
      const double a2 = g.dofs.size() == 2 ? g.knots[1][j] : 0.0;
      g.lmt(i, j) = spec.l0 + spec.c1 * a1 + spec.c2 * a2 + spec.q1 * a1 * a1 +
                    spec.cx * a1 * a2;
    }
  }
  g.validate();
  return g;
}

std::vector<std::string> layout_sides(SynthSpec::Layout layout) {
  return layout == SynthSpec::Layout::kAnkle2 ? std::vector<std::string>{"r"}
                                              : std::vector<std::string>{"r", "l"};
}

}  // namespace

std::vector<std::string> synth_dofs(SynthSpec::Layout layout) {
  std::vector<std::string> dofs;
  for (const auto& side : layout_sides(layout)) dofs.push_back("ankle_" + side);
  return dofs;
}

SynthModel make_synth_model(SynthSpec::Layout layout, bool ground_truth) {
  SynthModel out;
  out.model.name = layout == SynthSpec::Layout::kAnkle2 ? "synthetic ankle (2 MTU)"
                                                        : "bilateral ankle (14 MTU)";
  for (const auto& side : layout_sides(layout)) {
    out.model.joints.push_back({"ankle_" + side, -0.5, 0.6});
    out.model.joints.push_back({"knee_" + side, -0.05, 1.35});
    for (const auto& spec : layout_mtus(layout, side)) {
      MtuDef def;
      def.name = spec.name;
      def.spanned_joints = spec.joints;
      def.emg_channel = spec.emg;
      def.params = spec.nominal;
      if (ground_truth) {
        def.params.shape_factor_E = spec.true_e;
        def.params.f_max_iso = spec.nominal.f_max_iso * spec.true_fs;
        def.params.l_opt = spec.nominal.l_opt * spec.true_los;
        def.params.l_slack = spec.nominal.l_slack * spec.true_lss;
      }
      def.grid_path = "grids/" + def.name + ".csv";
      if (!spec.emg.empty()) out.model.mvc[spec.emg] = 1.0;

      GeometryGrid grid = make_grid(spec);
      out.model.geometry.emplace(def.name, GeometrySurrogate::fit(grid));
      out.grids.push_back(std::move(grid));
      out.model.mtus.push_back(std::move(def));
    }
  }
  out.model.validate();
  return out;
}

SynthTrial synth_trial(const SynthSpec& spec, const ModelDef& ground_truth, int trial_index) {
  if (!(spec.duration_s > 0.0 && spec.cadence_hz > 0.0 && spec.rate_hz > 0.0)) {
    throw std::invalid_argument("synth: duration, cadence and rate must be positive");
  }
  const double cadence = spec.cadence_hz * (1.0 + 0.12 * trial_index);
  const auto n = static_cast<Eigen::Index>(std::floor(spec.duration_s * spec.rate_hz)) + 1;

  std::mt19937_64 rng(spec.seed + 0x9e3779b97f4a7c15ull * std::uint64_t(trial_index + 1));
  std::normal_distribution<double> gauss(0.0, 1.0);

  const bool bilateral = ground_truth.joints.size() == 4;

  SynthTrial trial;
  trial.angles.time.resize(n);
  trial.emg.time.resize(n);
  for (const auto& j : ground_truth.joints) trial.angles.channels.push_back(j.name);
  for (const auto& [ch, v] : ground_truth.mvc) trial.emg.channels.push_back(ch);
  trial.angles.values.resize(n, trial.angles.cols());
  trial.emg.values.resize(n, trial.emg.cols());

  auto emg_of = [&](const std::string& channel, double p) {
    if (channel.rfind("sol", 0) == 0) return emg_sol(p);
    if (channel.rfind("ta", 0) == 0) return emg_ta(p);
    if (channel.rfind("gas_med", 0) == 0) return emg_gas_med(p);
    return emg_gas_lat(p);
  };

  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = double(i) / spec.rate_hz;
    trial.angles.time[i] = t;
    trial.emg.time[i] = t;
    const double phase = t * cadence + 0.1 * trial_index;

    for (Eigen::Index c = 0; c < trial.angles.cols(); ++c) {
      const std::string& name = trial.angles.channels[c];
      // Left-side kinematics run half a stride out of phase.
      const double p = phase + (bilateral && name.back() == 'l' ? 0.5 : 0.0);
      trial.angles.values(i, c) = name.rfind("ankle", 0) == 0 ? ankle_angle(p) : knee_angle(p);
    }
    for (Eigen::Index c = 0; c < trial.emg.cols(); ++c) {
      const std::string& name = trial.emg.channels[c];
      const double p = phase + (bilateral && name.back() == 'l' ? 0.5 : 0.0);
      double u = spec.emg_scale * emg_of(name, p);
      if (spec.noise > 0.0) u += spec.noise * gauss(rng);
      trial.emg.values(i, c) = std::clamp(u, 0.0, 1.0);
    }
  }

  // Ground-truth torques from the forward model make the dataset
  // self-consistent for calibration.
  const Trace torques =
      run_pipeline(ground_truth, trial.emg, trial.angles, AssistanceConfig{}, spec.rate_hz);
  const auto dofs = synth_dofs(bilateral ? SynthSpec::Layout::kBilateral14
                                         : SynthSpec::Layout::kAnkle2);
  trial.tau_id.time = torques.time;
  for (const auto& dof : dofs) {
    trial.tau_id.channels.push_back(dof);
  }
  trial.tau_id.values.resize(torques.rows(), static_cast<Eigen::Index>(dofs.size()));
  for (std::size_t d = 0; d < dofs.size(); ++d) {
    trial.tau_id.values.col(static_cast<Eigen::Index>(d)) = torques.col(dofs[d] + "_tau_bio");
  }
  return trial;
}

void synth_write(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "grids");
  fs::create_directories(out_dir / "trials");

  SynthModel truth = make_synth_model(spec.layout, true);
  SynthModel init = make_synth_model(spec.layout, false);
  for (const auto& grid : truth.grids) {
    write_geometry_grid(grid, out_dir / "grids" / (grid.mtu + ".csv"));
  }
  save_model(truth.model, out_dir / "model_true.json");
  save_model(init.model, out_dir / "model.json");

  nlohmann::json manifest;
  manifest["label"] = spec.speed_label;
  manifest["dofs"] = synth_dofs(spec.layout);
  manifest["trials"] = nlohmann::json::array();
  for (int k = 0; k < spec.trials; ++k) {
    const SynthTrial trial = synth_trial(spec, truth.model, k);
    const std::string base = "trials/trial" + std::to_string(k + 1);
    write_trace(trial.angles, out_dir / (base + "_angles.csv"));
    write_trace(trial.emg, out_dir / (base + "_emg.csv"));
    write_trace(trial.tau_id, out_dir / (base + "_tau.csv"));
    manifest["trials"].push_back({{"angles", base + "_angles.csv"},
                                  {"emg", base + "_emg.csv"},
                                  {"tau", base + "_tau.csv"}});
  }
  std::ofstream out(out_dir / "manifest.json", std::ios::binary);
  if (!out) throw ParseError("cannot write manifest in " + out_dir.string());
  out << manifest.dump(2) << "\n";
}

}  // namespace nmbc
