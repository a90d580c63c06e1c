#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace nmbc {

/// Time-stamped multichannel samples. `time` is strictly increasing and
/// `values` holds one row per sample, one column per channel. Immutable by
/// convention once loaded; cheap to copy around the pipeline.
struct Trace {
  Eigen::VectorXd time;                // seconds
  std::vector<std::string> channels;   // column names
  Eigen::MatrixXd values;              // rows() == time.size()

  Eigen::Index rows() const { return time.size(); }
  Eigen::Index cols() const { return static_cast<Eigen::Index>(channels.size()); }

  bool has_channel(const std::string& name) const;
  /// Throws ParseError if the channel is absent.
  Eigen::Index channel_index(const std::string& name) const;
  Eigen::VectorXd col(const std::string& name) const;

  double duration() const { return rows() > 0 ? time[rows() - 1] - time[0] : 0.0; }
};

/// Reads a CSV trace: header row, first column "time" (seconds), LF endings.
/// A channel header may carry a ":deg" suffix; such columns are converted to
/// radians and the suffix is dropped (":rad" is accepted as a no-op).
/// `expected_channels`, when non-empty, must all be present after suffix
/// stripping.
Trace load_trace(const std::filesystem::path& path,
                 const std::vector<std::string>& expected_channels = {});

/// Writes a trace as CSV with 17 significant digits so that
/// write_trace(load_trace(f)) reproduces f byte for byte for files produced
/// by this writer.
void write_trace(const Trace& trace, const std::filesystem::path& path);

/// Uniform sample interval; throws ParseError if the grid is not uniform to
/// within 1e-9 s or has fewer than 2 samples.
double sample_interval(const Trace& trace);

/// Linear interpolation of every channel onto an explicit grid. Grid points
/// outside the trace span clamp to the boundary samples.
Trace resample_onto(const Trace& trace, const Eigen::VectorXd& grid);

/// Column-wise concatenation of traces sharing one time grid (to 1e-9 s).
/// Duplicate channel names are rejected.
Trace merge_aligned(const std::vector<Trace>& traces);

}  // namespace nmbc
