#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nmbc/model.hpp"
#include "nmbc/trace.hpp"

namespace nmbc {

/// Synthetic treadmill-style session: periodic ankle/knee kinematics with
/// EMG bursts phase-locked to push-off, plus joint torques produced by the
/// ground-truth forward model so the dataset is a consistent calibration
/// target. Fully deterministic for a fixed seed.
struct SynthSpec {
  double duration_s = 10.0;
  double cadence_hz = 1.0;          // strides per second
  std::string speed_label = "0.5ms";
  std::uint64_t seed = 7;
  double noise = 0.0;               // EMG additive noise sigma
  double rate_hz = 1000.0;
  double emg_scale = 1.0;           // emulates reduced effort under assistance
  int trials = 2;
  enum class Layout { kAnkle2, kBilateral14 } layout = Layout::kAnkle2;
};

/// A model plus the geometry grids it was built from (so it can be written
/// out as files).
struct SynthModel {
  ModelDef model;
  std::vector<GeometryGrid> grids;
};

/// Builds the layout's model in memory. `ground_truth` selects the hidden
/// parameter set used to produce torques; otherwise nominal starting values.
SynthModel make_synth_model(SynthSpec::Layout layout, bool ground_truth);

struct SynthTrial {
  Trace angles;
  Trace emg;
  Trace tau_id;  // per calibrated DOF
};

/// Calibrated DOF names for a layout (the ankle torques).
std::vector<std::string> synth_dofs(SynthSpec::Layout layout);

/// One trial; `trial_index` perturbs cadence/phase so trials differ.
SynthTrial synth_trial(const SynthSpec& spec, const ModelDef& ground_truth, int trial_index);

/// Writes the whole bundle: model.json (nominal), model_true.json (ground
/// truth), grids/, trials/ and a calibration manifest.json.
void synth_write(const SynthSpec& spec, const std::filesystem::path& out_dir);

}  // namespace nmbc
