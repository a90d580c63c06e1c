#include "nmbc/torque.hpp"

#include <algorithm>
#include <cmath>

#include "nmbc/activation.hpp"
#include "nmbc/errors.hpp"
#include "nmbc/log.hpp"

namespace nmbc {

void AssistanceConfig::validate() const {
  if (!(support_ratio >= 0.0 && support_ratio <= 1.0)) {
    throw std::invalid_argument("support_ratio must be in [0, 1]");
  }
  if (!(torque_cap_nm > 0.0)) throw std::invalid_argument("torque cap must be positive");
}

double shape_assistance(double tau_bio, const AssistanceConfig& cfg) {
  cfg.validate();
  return std::clamp(cfg.support_ratio * tau_bio, -cfg.torque_cap_nm, cfg.torque_cap_nm);
}

Eigen::VectorXd joint_torque(const std::vector<MtuState>& states,
                             const std::vector<MomentArmRow>& arms, Eigen::Index n_joints) {
  if (states.size() != arms.size()) {
    throw std::invalid_argument("joint_torque: states/arms size mismatch");
  }
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(n_joints);
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (const auto& [j, dldtheta] : arms[i]) {
      tau[j] += states[i].f_mtu * -dldtheta;
    }
  }
  return tau;
}

Pipeline::Pipeline(const ModelDef& model, AssistanceConfig cfg,
                   std::vector<std::string> emg_channels)
    : model_(&model), cfg_(cfg) {
  cfg_.validate();
  for (const auto& mtu : model.mtus) {
    MtuSlot slot{&mtu, &model.surrogate(mtu.name), {}, -1, MtuSim(mtu.params)};
    for (const auto& j : mtu.spanned_joints) slot.joint_indices.push_back(model.joint_index(j));
    if (!mtu.emg_channel.empty()) {
      const auto it = std::find(emg_channels.begin(), emg_channels.end(), mtu.emg_channel);
      if (it == emg_channels.end()) {
        throw ParseError("pipeline: EMG input has no channel '" + mtu.emg_channel +
                         "' required by MTU '" + mtu.name + "'");
      }
      slot.emg_index = static_cast<Eigen::Index>(it - emg_channels.begin());
    }
    slots_.push_back(std::move(slot));
  }
  states_.resize(slots_.size());
  arms_.resize(slots_.size());
}

void Pipeline::reset() {
  for (auto& s : slots_) s.sim.reset();
  frame_ = 0;
  clamped_frames_ = 0;
}

JointTorqueFrame Pipeline::step(double t, const Eigen::VectorXd& angles,
                                const Eigen::VectorXd& u_bar, double dt) {
  if (angles.size() != static_cast<Eigen::Index>(model_->joints.size())) {
    throw std::invalid_argument("pipeline: angle vector size mismatch");
  }
  bool clamped = false;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    auto& slot = slots_[i];
    double local[2];
    for (std::size_t d = 0; d < slot.joint_indices.size(); ++d) {
      local[d] = angles[slot.joint_indices[d]];
    }
    const std::span<const double> view(local, slot.joint_indices.size());

    const double lmt = slot.surrogate->lmt(view, &clamped);
    arms_[i].clear();
    for (std::size_t d = 0; d < slot.joint_indices.size(); ++d) {
      arms_[i].emplace_back(slot.joint_indices[d], slot.surrogate->dlmt_dtheta(view, d));
    }

    double a = 0.0;
    if (slot.emg_index >= 0) {
      a = activation(u_bar[slot.emg_index], slot.def->params.shape_factor_E);
    }
    try {
      states_[i] = slot.sim.step(lmt, a, dt);
    } catch (const NumericalError& e) {
      throw NumericalError("pipeline frame " + std::to_string(frame_) + ", MTU '" +
                           slot.def->name + "': " + e.what());
    }
  }
  if (clamped && clamped_frames_++ == 0) {
    log_warn("joint angles outside the geometry domain; clamping (reported once)");
  }
  ++frame_;

  JointTorqueFrame out;
  out.t = t;
  out.tau_bio = joint_torque(states_, arms_, static_cast<Eigen::Index>(model_->joints.size()));
  out.tau_support.resize(out.tau_bio.size());
  for (Eigen::Index j = 0; j < out.tau_bio.size(); ++j) {
    out.tau_support[j] = shape_assistance(out.tau_bio[j], cfg_);
  }
  return out;
}

Trace run_pipeline(const ModelDef& model, const Trace& emg, const Trace& angles,
                   const AssistanceConfig& cfg, double rate_hz, bool emg_is_raw,
                   double raw_cutoff_hz) {
  cfg.validate();
  for (const auto& j : model.joints) {
    if (!angles.has_channel(j.name)) {
      throw ParseError("angle trace is missing joint channel '" + j.name + "'");
    }
  }
  for (const auto& m : model.mtus) {
    if (!m.emg_channel.empty() && !emg.has_channel(m.emg_channel)) {
      throw ParseError("EMG trace is missing channel '" + m.emg_channel + "' for MTU '" +
                       m.name + "'");
    }
  }

  Trace excitation = emg_is_raw ? envelope(emg, raw_cutoff_hz) : emg;

  // Keep only the channels the model wires; extra file columns are ignored.
  {
    Trace sub;
    sub.time = excitation.time;
    for (const auto& m : model.mtus) {
      if (!m.emg_channel.empty() && !sub.has_channel(m.emg_channel)) {
        sub.channels.push_back(m.emg_channel);
      }
    }
    sub.values.resize(excitation.rows(), static_cast<Eigen::Index>(sub.channels.size()));
    for (std::size_t c = 0; c < sub.channels.size(); ++c) {
      sub.values.col(static_cast<Eigen::Index>(c)) = excitation.col(sub.channels[c]);
    }
    excitation = std::move(sub);
  }

  // Common 1 kHz-style grid over the overlap of both traces.
  const double t0 = std::max(emg.time[0], angles.time[0]);
  const double t1 = std::min(emg.time[emg.rows() - 1], angles.time[angles.rows() - 1]);
  if (!(t1 > t0)) throw ParseError("EMG and angle traces do not overlap in time");
  const auto n = static_cast<Eigen::Index>(std::floor((t1 - t0) * rate_hz + 1e-9)) + 1;
  Eigen::VectorXd grid(n);
  for (Eigen::Index i = 0; i < n; ++i) grid[i] = t0 + double(i) / rate_hz;

  const Trace u = normalize_mvc(resample_onto(excitation, grid), model.mvc);
  const Trace ang = resample_onto(angles, grid);

  // Column maps into the resampled traces.
  std::vector<Eigen::Index> joint_col;
  for (const auto& j : model.joints) joint_col.push_back(ang.channel_index(j.name));

  Pipeline pipe(model, cfg, u.channels);
  const double dt = 1.0 / rate_hz;
  const auto n_joints = static_cast<Eigen::Index>(model.joints.size());

  Trace out;
  out.time = grid;
  for (const auto& j : model.joints) out.channels.push_back(j.name + "_tau_bio");
  for (const auto& j : model.joints) out.channels.push_back(j.name + "_tau_support");
  out.values.resize(n, 2 * n_joints);

  Eigen::VectorXd frame_angles(n_joints);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n_joints; ++j) frame_angles[j] = ang.values(i, joint_col[j]);
    const JointTorqueFrame f = pipe.step(grid[i], frame_angles, u.values.row(i).transpose(), dt);
    out.values.row(i).head(n_joints) = f.tau_bio;
    out.values.row(i).tail(n_joints) = f.tau_support;
  }
  return out;
}

}  // namespace nmbc
