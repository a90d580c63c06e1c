#pragma once

#include <string>
#include <vector>

#include "nmbc/trace.hpp"

namespace nmbc {

struct PeakOptions {
  double min_period_s = 0.8;      // slowest expected cadence
  double prominence_frac = 0.2;   // of the trace's peak-to-peak range
};

/// Indices of local maxima whose prominence exceeds the threshold and that
/// are separated by at least min_period_s (keeping the higher peak on
/// conflicts).
std::vector<Eigen::Index> find_peaks(const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                                     const PeakOptions& opts);

/// One segmented stride, resampled to 101 points (0..100% of the cycle)
/// with per-channel RMS over the cycle's native samples.
struct GaitCycle {
  int index = 0;
  double t_start = 0.0, t_end = 0.0;
  std::vector<std::string> channels;
  Eigen::MatrixXd resampled;  // 101 x channels, endpoints preserved
  Eigen::VectorXd rms;        // per channel
};

/// Splits the trace into cycles between consecutive knee-angle peaks.
/// Returns an empty list (with a warning) when fewer than 2 peaks exist.
std::vector<GaitCycle> segment(const Trace& trace, const std::string& knee_channel,
                               const PeakOptions& opts = {});

/// Root mean square per channel over native samples in [t_start, t_end).
Eigen::VectorXd cycle_rms(const Trace& trace, double t_start, double t_end);

/// Drops values above the Q3 + 3*IQR fence (quartiles by linear
/// interpolation). Fewer than 4 values pass through unchanged with a
/// warning.
std::vector<double> remove_outliers(const std::vector<double>& values);

struct ConditionSummary {
  std::string label;
  std::vector<std::string> channels;
  Eigen::VectorXd mean_rms;        // per channel, after outlier removal
  int cycles_before = 0;
  Eigen::VectorXi cycles_after;    // per channel (the fence is per channel)
};

ConditionSummary summarize_condition(const std::string& label, const Trace& trace,
                                     const std::string& knee_channel,
                                     const std::vector<std::string>& channels,
                                     const PeakOptions& opts = {});

/// 100 * (assisted - baseline) / baseline per channel; NaN where the
/// baseline mean is zero (reported as missing downstream).
Eigen::VectorXd percent_change(const ConditionSummary& assisted,
                               const ConditionSummary& baseline);

/// Arithmetic mean of two per-side summaries (matching channel sets).
ConditionSummary average_sides(const ConditionSummary& left, const ConditionSummary& right);

}  // namespace nmbc
