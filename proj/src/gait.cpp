#include "nmbc/gait.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nmbc/errors.hpp"
#include "nmbc/log.hpp"

namespace nmbc {

namespace {

// Topographic prominence of the local maximum at `p`: height above the
// higher of the two lowest saddles toward the nearest taller sample (or the
// trace edge) on each side.
double prominence(const Eigen::VectorXd& y, Eigen::Index p) {
  double left_min = y[p];
  for (Eigen::Index i = p; i >= 0; --i) {
    if (y[i] > y[p]) break;
    left_min = std::min(left_min, y[i]);
  }
  double right_min = y[p];
  for (Eigen::Index i = p; i < y.size(); ++i) {
    if (y[i] > y[p]) break;
    right_min = std::min(right_min, y[i]);
  }
  return y[p] - std::max(left_min, right_min);
}

}  // namespace

std::vector<Eigen::Index> find_peaks(const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                                     const PeakOptions& opts) {
  if (t.size() != y.size()) throw std::invalid_argument("find_peaks: t/y size mismatch");
  const Eigen::Index n = y.size();
  if (n < 3) return {};
  const double range = y.maxCoeff() - y.minCoeff();
  if (range <= 0.0) return {};
  const double min_prom = opts.prominence_frac * range;

  std::vector<Eigen::Index> candidates;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    if (y[i] <= y[i - 1]) continue;
    // Plateau tolerant: the peak ends where the signal first drops.
    Eigen::Index j = i;
    while (j + 1 < n && y[j + 1] == y[i]) ++j;
    if (j + 1 < n && y[j + 1] < y[i] && prominence(y, i) >= min_prom) {
      candidates.push_back((i + j) / 2);
    }
    i = j;
  }

  // Enforce the minimum separation, preferring higher peaks.
  std::vector<Eigen::Index> by_height = candidates;
  std::sort(by_height.begin(), by_height.end(),
            [&](Eigen::Index a, Eigen::Index b) { return y[a] > y[b]; });
  std::vector<bool> keep(candidates.size(), false);
  std::vector<Eigen::Index> kept;
  for (const Eigen::Index p : by_height) {
    bool ok = true;
    for (const Eigen::Index q : kept) {
      if (std::abs(t[p] - t[q]) < opts.min_period_s) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(p);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<GaitCycle> segment(const Trace& trace, const std::string& knee_channel,
                               const PeakOptions& opts) {
  if (trace.duration() <= 2.0 * opts.min_period_s) {
    throw std::invalid_argument("segment: trace must be longer than twice the minimum period");
  }
  const Eigen::VectorXd knee = trace.col(knee_channel);
  const auto peaks = find_peaks(trace.time, knee, opts);
  if (peaks.size() < 2) {
    log_warn("segment: fewer than 2 knee-angle peaks; no cycles");
    return {};
  }

  std::vector<GaitCycle> cycles;
  for (std::size_t k = 0; k + 1 < peaks.size(); ++k) {
    GaitCycle c;
    c.index = static_cast<int>(k);
    c.t_start = trace.time[peaks[k]];
    c.t_end = trace.time[peaks[k + 1]];
    c.channels = trace.channels;
    c.rms = cycle_rms(trace, c.t_start, c.t_end);

    c.resampled.resize(101, trace.cols());
    Eigen::Index j = peaks[k];
    for (int s = 0; s <= 100; ++s) {
      const double tt = c.t_start + (c.t_end - c.t_start) * double(s) / 100.0;
      while (j + 1 < trace.rows() && trace.time[j + 1] <= tt) ++j;
      if (j + 1 >= trace.rows() || s == 100) {
        c.resampled.row(s) = trace.values.row(std::min(peaks[k + 1], trace.rows() - 1));
        continue;
      }
      const double t0 = trace.time[j], t1 = trace.time[j + 1];
      const double w = t1 > t0 ? (tt - t0) / (t1 - t0) : 0.0;
      c.resampled.row(s) = (1.0 - w) * trace.values.row(j) + w * trace.values.row(j + 1);
    }
    // Endpoints are the boundary samples themselves.
    c.resampled.row(0) = trace.values.row(peaks[k]);
    c.resampled.row(100) = trace.values.row(peaks[k + 1]);
    cycles.push_back(std::move(c));
  }
  return cycles;
}

Eigen::VectorXd cycle_rms(const Trace& trace, double t_start, double t_end) {
  if (!(t_end > t_start)) throw std::invalid_argument("cycle_rms: empty cycle");
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(trace.cols());
  long count = 0;
  for (Eigen::Index i = 0; i < trace.rows(); ++i) {
    if (trace.time[i] < t_start || trace.time[i] >= t_end) continue;
    sq += trace.values.row(i).transpose().cwiseAbs2();
    ++count;
  }
  if (count == 0) throw std::invalid_argument("cycle_rms: no samples in cycle");
  return (sq / double(count)).cwiseSqrt();
}

namespace {

double quantile_r7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = p * double(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(h));
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (h - double(i)) * (v[i + 1] - v[i]);
}

}  // namespace

std::vector<double> remove_outliers(const std::vector<double>& values) {
  if (values.size() < 4) {
    log_warn("remove_outliers: fewer than 4 values; passing through");
    return values;
  }
  const double q1 = quantile_r7(values, 0.25);
  const double q3 = quantile_r7(values, 0.75);
  const double fence = q3 + 3.0 * (q3 - q1);
  std::vector<double> out;
  out.reserve(values.size());
  for (const double v : values) {
    if (v <= fence) out.push_back(v);
  }
  return out;
}

ConditionSummary summarize_condition(const std::string& label, const Trace& trace,
                                     const std::string& knee_channel,
                                     const std::vector<std::string>& channels,
                                     const PeakOptions& opts) {
  const auto cycles = segment(trace, knee_channel, opts);
  ConditionSummary s;
  s.label = label;
  s.channels = channels;
  s.cycles_before = static_cast<int>(cycles.size());
  s.mean_rms.resize(static_cast<Eigen::Index>(channels.size()));
  s.cycles_after.resize(static_cast<Eigen::Index>(channels.size()));
  for (std::size_t ci = 0; ci < channels.size(); ++ci) {
    const Eigen::Index col = trace.channel_index(channels[ci]);
    std::vector<double> rms;
    rms.reserve(cycles.size());
    for (const auto& c : cycles) rms.push_back(c.rms[col]);
    const auto kept = remove_outliers(rms);
    s.cycles_after[static_cast<Eigen::Index>(ci)] = static_cast<int>(kept.size());
    double mean = 0.0;
    for (const double v : kept) mean += v;
    s.mean_rms[static_cast<Eigen::Index>(ci)] = kept.empty() ? 0.0 : mean / double(kept.size());
  }
  return s;
}

Eigen::VectorXd percent_change(const ConditionSummary& assisted,
                               const ConditionSummary& baseline) {
  if (assisted.channels != baseline.channels) {
    throw std::invalid_argument("percent_change: channel sets differ");
  }
  Eigen::VectorXd out(assisted.mean_rms.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double base = baseline.mean_rms[i];
    out[i] = base == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                         : 100.0 * (assisted.mean_rms[i] - base) / base;
  }
  return out;
}

ConditionSummary average_sides(const ConditionSummary& left, const ConditionSummary& right) {
  if (left.channels != right.channels) {
    throw std::invalid_argument("average_sides: channel sets differ");
  }
  ConditionSummary s = left;
  s.label = left.label + "+" + right.label;
  s.mean_rms = 0.5 * (left.mean_rms + right.mean_rms);
  s.cycles_before = left.cycles_before + right.cycles_before;
  s.cycles_after = left.cycles_after + right.cycles_after;
  return s;
}

}  // namespace nmbc
