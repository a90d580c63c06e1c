#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nmbc/geometry.hpp"

namespace nmbc {

/// Per-MTU calibratable parameters.
struct MtuParams {
  double shape_factor_E = -1.5;  // EMG shape factor, in [-3, 0)
  double f_max_iso = 0.0;        // N
  double l_opt = 0.0;            // optimal fiber length, m
  double l_slack = 0.0;          // tendon slack length, m
  double alpha_opt = 0.0;        // pennation at optimal fiber length, rad
  double damping_dm = 0.1;       // normalized linear fiber damping

  void validate(const std::string& who) const;
};

struct JointDef {
  std::string name;
  double angle_min = 0.0;  // rad
  double angle_max = 0.0;  // rad
};

struct MtuDef {
  std::string name;
  std::vector<std::string> spanned_joints;  // ordered, matches geometry DOFs
  std::string emg_channel;                  // empty: no EMG, activation == 0
  MtuParams params;
  std::string grid_path;                    // as written in the model file
  std::filesystem::path grid_abs;           // resolved at load; empty for in-memory models
};

/// A loaded, fully validated model: joints, MTUs, MVC table and fitted
/// geometry surrogates. Immutable by convention after load; safe to share.
struct ModelDef {
  std::string name;
  std::vector<JointDef> joints;
  std::vector<MtuDef> mtus;
  std::map<std::string, double> mvc;                       // per EMG channel
  std::map<std::string, GeometrySurrogate> geometry;       // per MTU name

  Eigen::Index joint_index(const std::string& name) const;  // throws ParseError
  const MtuDef* find_mtu(const std::string& name) const;
  const GeometrySurrogate& surrogate(const std::string& mtu) const;

  /// Cross-checks all invariants (unique names, wiring, MVC coverage,
  /// geometry domains covering joint ranges). Throws ParseError naming the
  /// offending element.
  void validate() const;
};

/// Loads and validates a model file (documented JSON schema, version 1).
/// Geometry grid paths are resolved relative to the model file.
ModelDef load_model(const std::filesystem::path& path);

/// Writes the model back out (same schema); geometry grid references are
/// preserved as loaded. Models built in memory without grid paths cannot be
/// saved.
void save_model(const ModelDef& model, const std::filesystem::path& path);

}  // namespace nmbc
