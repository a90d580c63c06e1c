// nmbc: EMG + joint-angle driven joint torque estimation, model calibration,
// actuator simulation and gait-cycle reporting. All I/O is CSV/JSON; logs go
// to stderr (NMBC_LOG controls verbosity).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nmbc/activation.hpp"
#include "nmbc/calibration.hpp"
#include "nmbc/curves.hpp"
#include "nmbc/errors.hpp"
#include "nmbc/exo_sim.hpp"
#include "nmbc/gait.hpp"
#include "nmbc/log.hpp"
#include "nmbc/model.hpp"
#include "nmbc/synth.hpp"
#include "nmbc/torque.hpp"
#include "nmbc/trace.hpp"

namespace fs = std::filesystem;
using namespace nmbc;

namespace {

int run_synth(const SynthSpec& spec, const std::string& out_dir) {
  synth_write(spec, out_dir);
  log_info("synthetic dataset written to " + out_dir);
  return 0;
}

int run_pretune_cmd(const std::string& model_path, const std::string& scaled_path,
                    const std::string& out_path) {
  const ModelDef model = load_model(model_path);
  const ModelDef* scaled = &model;
  ModelDef scaled_storage;
  if (!scaled_path.empty()) {
    scaled_storage = load_model(scaled_path);
    scaled = &scaled_storage;
  }

  ModelDef tuned = model;
  for (auto& mtu : tuned.mtus) {
    const auto samples = make_pretune_samples(model, mtu.name, scaled->surrogate(mtu.name));
    const PretuneResult r = pretune(samples, mtu.params);
    std::fprintf(stderr, "pretune %-12s l_opt %.6f -> %.6f  l_slack %.6f -> %.6f  obj %.3e\n",
                 mtu.name.c_str(), mtu.params.l_opt, r.l_opt, mtu.params.l_slack, r.l_slack,
                 r.objective);
    mtu.params.l_opt = r.l_opt;
    mtu.params.l_slack = r.l_slack;
  }
  save_model(tuned, out_path);
  return 0;
}

int run_calibrate(const std::string& dataset_dir, const std::string& model_path,
                  std::uint64_t seed, long max_evals, const std::string& out_path) {
  const ModelDef model = load_model(model_path);
  const CalibrationDataset ds = load_dataset(dataset_dir);
  SaOptions opts;
  opts.seed = seed;
  opts.max_evals = max_evals;
  const CalibrationResult res = calibrate_sa(ds, model, opts);

  ModelDef calibrated = model;
  for (std::size_t i = 0; i < res.params.size(); ++i) calibrated.mtus[i].params = res.params[i];
  save_model(calibrated, out_path);

  std::fprintf(stderr, "calibration: objective %.6g -> %.6g (N*m)^2 in %ld evals%s\n",
               res.initial_objective, res.final_objective, res.evals,
               res.budget_exhausted ? " [budget exhausted]" : "");
  for (std::size_t d = 0; d < ds.dofs.size(); ++d) {
    std::fprintf(stderr, "  %-10s torque RMSE %.4f N*m\n", ds.dofs[d].c_str(),
                 res.rmse_per_dof[static_cast<Eigen::Index>(d)]);
  }
  return 0;
}

int run_run(const std::string& model_path, const std::string& emg_path,
            const std::string& angles_path, double support_ratio, double cap,
            const std::string& emg_mode, double cutoff, double rate,
            const std::string& out_path) {
  const ModelDef model = load_model(model_path);
  const Trace emg = load_trace(emg_path);
  const Trace angles = load_trace(angles_path);
  AssistanceConfig cfg;
  cfg.support_ratio = support_ratio;
  cfg.torque_cap_nm = cap;
  const Trace out =
      run_pipeline(model, emg, angles, cfg, rate, emg_mode == "raw", cutoff);
  write_trace(out, out_path);
  log_info("torque trace written to " + out_path);
  return 0;
}

int run_simulate(const std::string& ref_path, const std::string& motion_path,
                 const DobController& ctrl, double inertia, const std::string& out_path) {
  SeaPlant plant;
  plant.motor_inertia = inertia;
  const Trace ref = load_trace(ref_path, {"tau_ref"});
  const Trace motion = load_trace(motion_path, {"angle"});
  const SimResult res = simulate(plant, ctrl, ref, motion);
  write_trace(res.series, out_path);
  std::fprintf(stderr, "tracking RMS error %.4f N*m over %.2f s\n", res.tracking_rms,
               res.series.time[res.series.rows() - 1] - res.series.time[0]);
  return 0;
}

int run_analyze(const std::string& session_dir, const std::string& out_path) {
  const fs::path dir(session_dir);
  std::ifstream in(dir / "session.json", std::ios::binary);
  if (!in) throw ParseError("cannot open " + (dir / "session.json").string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError((dir / "session.json").string() + ": " + e.what());
  }

  const std::string knee = j.at("knee_channel").get<std::string>();
  const std::string baseline_label = j.value("baseline", "nonassisted");
  std::vector<std::string> channels;
  for (const auto& c : j.at("channels")) channels.push_back(c.get<std::string>());
  PeakOptions opts;
  opts.min_period_s = j.value("min_period_s", 0.8);

  std::vector<ConditionSummary> summaries;
  for (const auto& cond : j.at("conditions")) {
    std::vector<Trace> parts;
    for (const auto& f : cond.at("traces")) {
      parts.push_back(load_trace(dir / f.get<std::string>()));
    }
    const Trace merged = merge_aligned(parts);
    summaries.push_back(summarize_condition(cond.at("label").get<std::string>(), merged, knee,
                                            channels, opts));
  }

  const ConditionSummary* baseline = nullptr;
  for (const auto& s : summaries) {
    if (s.label == baseline_label) baseline = &s;
  }

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ParseError("cannot write report: " + out_path);
  out << "condition,channel,mean_rms,cycles_before,cycles_after,percent_change_vs_"
      << baseline_label << "\n";
  char buf[64];
  for (const auto& s : summaries) {
    Eigen::VectorXd pc;
    if (baseline && &s != baseline) pc = percent_change(s, *baseline);
    for (std::size_t c = 0; c < s.channels.size(); ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      out << s.label << "," << s.channels[c] << ",";
      std::snprintf(buf, sizeof buf, "%.10g", s.mean_rms[ci]);
      out << buf << "," << s.cycles_before << "," << s.cycles_after[ci] << ",";
      if (pc.size() > 0 && std::isfinite(pc[ci])) {
        std::snprintf(buf, sizeof buf, "%.10g", pc[ci]);
        out << buf;
      }
      out << "\n";
    }
  }
  log_info("report written to " + out_path);
  return 0;
}

int run_dump_curves(const std::string& out_path, int samples) {
  const CurveSet& c = CurveSet::defaults();
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ParseError("cannot write curves: " + out_path);
  out << "curve,x,y\n";
  char buf[80];
  const auto dump = [&](const char* name, const MonotoneCubic& curve, double lo, double hi) {
    for (int i = 0; i < samples; ++i) {
      const double x = lo + (hi - lo) * double(i) / double(samples - 1);
      std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n", name, x, curve.value(x));
      out << buf;
    }
    // The defining knots themselves, for exact downstream checks.
    for (Eigen::Index i = 0; i < curve.x().size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n", name, curve.x()[i],
                    curve.value(curve.x()[i]));
      out << buf;
    }
  };
  dump("active_fl", c.active_fl, 0.3, 1.8);
  dump("passive_fl", c.passive_fl, 0.3, 1.8);
  dump("fv", c.fv, -1.2, 1.2);
  for (int i = 0; i < samples; ++i) {
    const double eps = -0.005 + 0.055 * double(i) / double(samples - 1);
    std::snprintf(buf, sizeof buf, "tendon,%.17g,%.17g\n", eps, tendon_force_norm(eps));
    out << buf;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neuromechanical model-based torque estimation and assistance toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a self-consistent synthetic dataset");
  SynthSpec spec;
  std::string synth_out = "synth_out";
  std::string layout = "ankle2";
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--seed", spec.seed, "RNG seed");
  synth->add_option("--duration", spec.duration_s, "trial duration, s");
  synth->add_option("--cadence", spec.cadence_hz, "strides per second");
  synth->add_option("--rate", spec.rate_hz, "sample rate, Hz");
  synth->add_option("--noise", spec.noise, "EMG additive noise sigma");
  synth->add_option("--speed-label", spec.speed_label, "condition label for the manifest");
  synth->add_option("--emg-scale", spec.emg_scale,
                    "EMG amplitude scale (emulates assisted effort reduction)");
  synth->add_option("--trials", spec.trials, "number of trials");
  synth->add_option("--layout", layout, "model layout: ankle2 | bilateral14")
      ->check(CLI::IsMember({"ankle2", "bilateral14"}));

  // pretune
  auto* pre = app.add_subcommand("pretune", "pre-tune optimal fiber and tendon slack lengths");
  std::string pre_model, pre_scaled, pre_out;
  pre->add_option("--model", pre_model, "model JSON")->required();
  pre->add_option("--scaled-model", pre_scaled,
                  "scaled-geometry model JSON (defaults to --model)");
  pre->add_option("--out", pre_out, "output model JSON")->required();

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "simulated-annealing model personalization");
  std::string cal_ds, cal_model, cal_out;
  std::uint64_t cal_seed = 7;
  long cal_evals = 100000;
  cal->add_option("--dataset", cal_ds, "dataset directory (manifest.json)")->required();
  cal->add_option("--model", cal_model, "model JSON (pretuned)")->required();
  cal->add_option("--seed", cal_seed, "RNG seed");
  cal->add_option("--max-evals", cal_evals, "objective evaluation budget");
  cal->add_option("--out", cal_out, "output model JSON")->required();

  // run
  auto* run = app.add_subcommand("run", "stream EMG + angles through the torque estimator");
  std::string run_model, run_emg, run_angles, run_out = "torques.csv";
  std::string emg_mode = "envelope";
  double support = 0.0, cap = 40.0, cutoff = 2.0, rate = 1000.0;
  run->add_option("--model", run_model, "model JSON")->required();
  run->add_option("--emg", run_emg, "EMG trace CSV")->required();
  run->add_option("--angles", run_angles, "joint angle trace CSV")->required();
  run->add_option("--support-ratio", support, "assistance ratio in [0,1]");
  run->add_option("--torque-cap", cap, "assistance cap, N*m");
  run->add_option("--emg-mode", emg_mode, "envelope (default) | raw")
      ->check(CLI::IsMember({"envelope", "raw"}));
  run->add_option("--cutoff", cutoff, "software envelope cutoff, Hz (raw mode)");
  run->add_option("--rate", rate, "pipeline rate, Hz");
  run->add_option("--out", run_out, "output torque CSV");

  // simulate-exo
  auto* sim = app.add_subcommand("simulate-exo", "series-elastic actuator torque tracking");
  std::string sim_ref, sim_motion, sim_out = "sim.csv";
  DobController ctrl;
  double inertia = 0.12;
  sim->add_option("--ref", sim_ref, "reference torque CSV (column tau_ref)")->required();
  sim->add_option("--motion", sim_motion, "joint motion CSV (column angle)")->required();
  sim->add_option("--kp", ctrl.kp, "inner PD proportional gain");
  sim->add_option("--kd", ctrl.kd, "inner PD derivative gain");
  sim->add_option("--q-cutoff", ctrl.q_cutoff_hz, "DOB Q filter cutoff, Hz");
  sim->add_flag("--no-dob", [&ctrl](std::int64_t) { ctrl.dob_enabled = false; },
                "disable the disturbance observer");
  sim->add_option("--inertia", inertia, "reflected motor inertia, kg*m^2");
  sim->add_option("--out", sim_out, "output CSV");

  // analyze
  auto* ana = app.add_subcommand("analyze", "gait-cycle RMS and percent-change report");
  std::string ana_session, ana_out = "report.csv";
  ana->add_option("--session", ana_session, "session directory (session.json)")->required();
  ana->add_option("--out", ana_out, "report CSV");

  // dump-curves
  auto* dump = app.add_subcommand("dump-curves", "sample the normalized force relationships");
  std::string dump_out = "curves.csv";
  int dump_samples = 200;
  dump->add_option("--out", dump_out, "output CSV");
  dump->add_option("--samples", dump_samples, "samples per curve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors exit 1; --help exits 0
  }

  try {
    if (synth->parsed()) {
      spec.layout = layout == "bilateral14" ? SynthSpec::Layout::kBilateral14
                                            : SynthSpec::Layout::kAnkle2;
      return run_synth(spec, synth_out);
    }
    if (pre->parsed()) return run_pretune_cmd(pre_model, pre_scaled, pre_out);
    if (cal->parsed()) return run_calibrate(cal_ds, cal_model, cal_seed, cal_evals, cal_out);
    if (run->parsed()) {
      return run_run(run_model, run_emg, run_angles, support, cap, emg_mode, cutoff, rate,
                     run_out);
    }
    if (sim->parsed()) return run_simulate(sim_ref, sim_motion, ctrl, inertia, sim_out);
    if (ana->parsed()) return run_analyze(ana_session, ana_out);
    if (dump->parsed()) return run_dump_curves(dump_out, dump_samples);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
