#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nmbc/model.hpp"
#include "nmbc/muscle.hpp"
#include "nmbc/trace.hpp"

namespace nmbc {

struct AssistanceConfig {
  double support_ratio = 0.0;  // in [0, 1]
  double torque_cap_nm = 40.0;

  void validate() const;
};

/// clamp(support_ratio * tau_bio, -cap, +cap).
double shape_assistance(double tau_bio, const AssistanceConfig& cfg);

/// Per-MTU sparse moment-arm row: (joint index, dL/dtheta) entries for the
/// joints the MTU spans.
using MomentArmRow = std::vector<std::pair<Eigen::Index, double>>;

/// tau_j = sum_i F^MTU_i * (-dL_i/dtheta_j) over the MTUs spanning joint j.
/// The negation makes a muscle that shortens with growing angle act in the
/// positive direction of that angle.
Eigen::VectorXd joint_torque(const std::vector<MtuState>& states,
                             const std::vector<MomentArmRow>& arms, Eigen::Index n_joints);

struct JointTorqueFrame {
  double t = 0.0;
  Eigen::VectorXd tau_bio;      // per joint, model order
  Eigen::VectorXd tau_support;  // per joint
};

/// Streaming, causal torque estimator over aligned frames. One instance per
/// stream; distinct instances share nothing mutable.
class Pipeline {
 public:
  /// `emg_channels` fixes the column order of the excitation vectors passed
  /// to step(). The model is borrowed and must outlive the pipeline.
  Pipeline(const ModelDef& model, AssistanceConfig cfg,
           std::vector<std::string> emg_channels);

  /// One frame: joint angles (rad, model joint order) and normalized
  /// excitations in [0,1] (emg_channels order).
  JointTorqueFrame step(double t, const Eigen::VectorXd& angles, const Eigen::VectorXd& u_bar,
                        double dt);

  void reset();

  const std::vector<MtuState>& last_states() const { return states_; }
  long clamped_frames() const { return clamped_frames_; }

 private:
  struct MtuSlot {
    const MtuDef* def;
    const GeometrySurrogate* surrogate;
    std::vector<Eigen::Index> joint_indices;  // into model joints
    Eigen::Index emg_index = -1;              // into emg_channels, -1 == none
    MtuSim sim;
  };

  const ModelDef* model_;
  AssistanceConfig cfg_;
  std::vector<MtuSlot> slots_;
  std::vector<MtuState> states_;
  std::vector<MomentArmRow> arms_;
  long frame_ = 0;
  long clamped_frames_ = 0;
};

/// End-to-end Fig. 1 A-E run: resamples EMG and joint-angle traces onto a
/// common uniform grid (default 1 kHz), optionally applies the software
/// envelope (raw mode), normalizes by MVC, and streams through the model.
/// Returns a trace with `<joint>_tau_bio` and `<joint>_tau_support` columns.
Trace run_pipeline(const ModelDef& model, const Trace& emg, const Trace& angles,
                   const AssistanceConfig& cfg, double rate_hz = 1000.0,
                   bool emg_is_raw = false, double raw_cutoff_hz = 2.0);

}  // namespace nmbc
