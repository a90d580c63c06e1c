#include "nmbc/trace.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "nmbc/errors.hpp"

namespace nmbc {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& cell, const std::filesystem::path& path,
                  std::size_t line_no, const std::string& column) {
  const std::string t = strip(cell);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ParseError(path.string() + ":" + std::to_string(line_no) +
                     ": non-numeric value '" + t + "' in column '" + column + "'");
  }
  return v;
}

}  // namespace

bool Trace::has_channel(const std::string& name) const {
  return std::find(channels.begin(), channels.end(), name) != channels.end();
}

Eigen::Index Trace::channel_index(const std::string& name) const {
  auto it = std::find(channels.begin(), channels.end(), name);
  if (it == channels.end()) throw ParseError("missing channel '" + name + "'");
  return static_cast<Eigen::Index>(it - channels.begin());
}

Eigen::VectorXd Trace::col(const std::string& name) const {
  return values.col(channel_index(name));
}

Trace load_trace(const std::filesystem::path& path,
                 const std::vector<std::string>& expected_channels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open trace file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  auto header = split_csv_line(line);
  if (header.empty() || strip(header[0]) != "time") {
    throw ParseError(path.string() + ":1: first column must be 'time'");
  }

  Trace trace;
  std::vector<double> unit_scale;  // per data column
  for (std::size_t i = 1; i < header.size(); ++i) {
    std::string name = strip(header[i]);
    double scale = 1.0;
    if (auto pos = name.rfind(":deg"); pos != std::string::npos && pos == name.size() - 4) {
      name = name.substr(0, pos);
      scale = std::numbers::pi / 180.0;
    } else if (auto rp = name.rfind(":rad"); rp != std::string::npos && rp == name.size() - 4) {
      name = name.substr(0, rp);
    }
    if (name.empty()) throw ParseError(path.string() + ":1: empty channel name");
    if (std::find(trace.channels.begin(), trace.channels.end(), name) != trace.channels.end()) {
      throw ParseError(path.string() + ":1: duplicate channel '" + name + "'");
    }
    trace.channels.push_back(name);
    unit_scale.push_back(scale);
  }

  std::vector<double> times;
  std::vector<double> cells;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " columns, got " +
                       std::to_string(fields.size()));
    }
    const double t = parse_cell(fields[0], path, line_no, "time");
    if (!times.empty() && t <= times.back()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": time must be strictly increasing (" + std::to_string(t) +
                       " after " + std::to_string(times.back()) + ")");
    }
    times.push_back(t);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      cells.push_back(parse_cell(fields[c], path, line_no, trace.channels[c - 1]) *
                      unit_scale[c - 1]);
    }
  }

  const auto n = static_cast<Eigen::Index>(times.size());
  const auto m = static_cast<Eigen::Index>(trace.channels.size());
  trace.time = Eigen::Map<Eigen::VectorXd>(times.data(), n);
  trace.values.resize(n, m);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < m; ++c) trace.values(r, c) = cells[r * m + c];

  for (const auto& want : expected_channels) {
    if (!trace.has_channel(want)) {
      throw ParseError(path.string() + ": missing required channel '" + want + "'");
    }
  }
  return trace;
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write trace file: " + path.string());
  out << "time";
  for (const auto& c : trace.channels) out << "," << c;
  out << "\n";
  char buf[40];
  for (Eigen::Index r = 0; r < trace.rows(); ++r) {
    std::snprintf(buf, sizeof buf, "%.17g", trace.time[r]);
    out << buf;
    for (Eigen::Index c = 0; c < trace.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", trace.values(r, c));
      out << "," << buf;
    }
    out << "\n";
  }
  if (!out) throw ParseError("write failed: " + path.string());
}

double sample_interval(const Trace& trace) {
  if (trace.rows() < 2) throw ParseError("trace needs at least 2 samples");
  const double dt = (trace.time[trace.rows() - 1] - trace.time[0]) / double(trace.rows() - 1);
  for (Eigen::Index i = 1; i < trace.rows(); ++i) {
    if (std::abs(trace.time[i] - trace.time[i - 1] - dt) > 1e-9) {
      throw ParseError("trace is not uniformly sampled");
    }
  }
  return dt;
}

Trace resample_onto(const Trace& trace, const Eigen::VectorXd& grid) {
  Trace out;
  out.time = grid;
  out.channels = trace.channels;
  out.values.resize(grid.size(), trace.cols());
  Eigen::Index j = 0;  // left bracket index, advanced monotonically
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    while (j + 1 < trace.rows() && trace.time[j + 1] <= t) ++j;
    if (t <= trace.time[0]) {
      out.values.row(i) = trace.values.row(0);
    } else if (t >= trace.time[trace.rows() - 1]) {
      out.values.row(i) = trace.values.row(trace.rows() - 1);
    } else {
      const double t0 = trace.time[j], t1 = trace.time[j + 1];
      const double w = (t - t0) / (t1 - t0);
      out.values.row(i) = (1.0 - w) * trace.values.row(j) + w * trace.values.row(j + 1);
    }
  }
  return out;
}

Trace merge_aligned(const std::vector<Trace>& traces) {
  if (traces.empty()) throw std::invalid_argument("merge_aligned: no traces");
  Trace out;
  out.time = traces[0].time;
  Eigen::Index total = 0;
  for (const auto& t : traces) {
    if (t.rows() != out.time.size() ||
        (t.time - out.time).cwiseAbs().maxCoeff() > 1e-9) {
      throw ParseError("merge_aligned: traces are not on a common time grid");
    }
    total += t.cols();
  }
  out.values.resize(out.time.size(), total);
  Eigen::Index at = 0;
  for (const auto& t : traces) {
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
      if (std::find(out.channels.begin(), out.channels.end(), t.channels[c]) !=
          out.channels.end()) {
        throw ParseError("merge_aligned: duplicate channel '" + t.channels[c] + "'");
      }
      out.channels.push_back(t.channels[c]);
      out.values.col(at++) = t.values.col(c);
    }
  }
  return out;
}

}  // namespace nmbc
