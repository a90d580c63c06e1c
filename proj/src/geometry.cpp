#include "nmbc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nmbc/errors.hpp"
#include "nmbc/trace.hpp"

namespace nmbc {

void GeometryGrid::validate() const {
  const std::string who = "geometry grid for MTU '" + mtu + "'";
  if (dofs.empty() || dofs.size() > 2) {
    throw ParseError(who + ": needs 1 or 2 DOFs, got " + std::to_string(dofs.size()));
  }
  if (knots.size() != dofs.size()) throw ParseError(who + ": knot/DOF count mismatch");
  for (std::size_t d = 0; d < knots.size(); ++d) {
    if (knots[d].size() < 4) {
      throw ParseError(who + ": DOF '" + dofs[d] + "' needs at least 4 knots");
    }
    for (Eigen::Index i = 1; i < knots[d].size(); ++i) {
      if (!(knots[d][i] > knots[d][i - 1])) {
        throw ParseError(who + ": knots for DOF '" + dofs[d] + "' must be strictly increasing");
      }
    }
  }
  const Eigen::Index want_rows = knots[0].size();
  const Eigen::Index want_cols = dofs.size() == 2 ? knots[1].size() : 1;
  if (lmt.rows() != want_rows || lmt.cols() != want_cols) {
    throw ParseError(who + ": length tensor shape mismatch");
  }
  if (!(lmt.array() > 0.0).all()) throw ParseError(who + ": lengths must be positive");
}

GeometryGrid load_geometry_grid(const std::filesystem::path& path, const std::string& mtu) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open geometry grid: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) header.push_back(field);
  }
  if (header.size() < 2 || header.size() > 3 || header.back() != "lmt") {
    throw ParseError(path.string() + ": header must be '<joint1>[,<joint2>],lmt'");
  }

  GeometryGrid grid;
  grid.mtu = mtu;
  grid.dofs.assign(header.begin(), header.end() - 1);
  const std::size_t ndof = grid.dofs.size();

  std::vector<std::array<double, 3>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string field;
    std::array<double, 3> row{0, 0, 0};
    std::size_t c = 0;
    while (std::getline(ss, field, ',')) {
      if (c > ndof) break;
      try {
        row[c] = std::stod(field);
      } catch (const std::exception&) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": non-numeric value '" + field + "'");
      }
      ++c;
    }
    if (c != ndof + 1) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(ndof + 1) + " columns");
    }
    rows.push_back(row);
  }

  // Knot vectors are the sorted unique angle values per DOF; the rows must
  // form the complete row-major grid over them.
  for (std::size_t d = 0; d < ndof; ++d) {
    std::set<double> uniq;
    for (const auto& r : rows) uniq.insert(r[d]);
    Eigen::VectorXd k(static_cast<Eigen::Index>(uniq.size()));
    Eigen::Index i = 0;
    for (double v : uniq) k[i++] = v;
    grid.knots.push_back(std::move(k));
  }
  const Eigen::Index n0 = grid.knots[0].size();
  const Eigen::Index n1 = ndof == 2 ? grid.knots[1].size() : 1;
  if (static_cast<Eigen::Index>(rows.size()) != n0 * n1) {
    throw ParseError(path.string() + ": expected " + std::to_string(n0 * n1) +
                     " grid rows, got " + std::to_string(rows.size()));
  }
  grid.lmt.resize(n0, n1);
  for (Eigen::Index i = 0; i < n0; ++i) {
    for (Eigen::Index j = 0; j < n1; ++j) {
      const auto& r = rows[static_cast<std::size_t>(i * n1 + j)];
      if (std::abs(r[0] - grid.knots[0][i]) > 1e-12 ||
          (ndof == 2 && std::abs(r[1] - grid.knots[1][j]) > 1e-12)) {
        throw ParseError(path.string() + ": rows are not row-major over the knot grid");
      }
      grid.lmt(i, j) = r[ndof];
    }
  }
  grid.validate();
  return grid;
}

void write_geometry_grid(const GeometryGrid& grid, const std::filesystem::path& path) {
  grid.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write geometry grid: " + path.string());
  for (std::size_t d = 0; d < grid.dofs.size(); ++d) out << grid.dofs[d] << ",";
  out << "lmt\n";
  char buf[40];
  const Eigen::Index n1 = grid.dofs.size() == 2 ? grid.knots[1].size() : 1;
  for (Eigen::Index i = 0; i < grid.knots[0].size(); ++i) {
    for (Eigen::Index j = 0; j < n1; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", grid.knots[0][i]);
      out << buf << ",";
      if (grid.dofs.size() == 2) {
        std::snprintf(buf, sizeof buf, "%.17g", grid.knots[1][j]);
        out << buf << ",";
      }
      std::snprintf(buf, sizeof buf, "%.17g", grid.lmt(i, j));
      out << buf << "\n";
    }
  }
}

GeometrySurrogate GeometrySurrogate::fit(const GeometryGrid& grid) {
  grid.validate();
  GeometrySurrogate s;
  s.dofs_ = grid.dofs;
  if (grid.dofs.size() == 1) {
    s.spline_ = CubicSpline1D::fit(grid.knots[0], grid.lmt.col(0));
  } else {
    s.spline_ = CubicSpline2D::fit(grid.knots[0], grid.knots[1], grid.lmt);
  }
  return s;
}

std::pair<double, double> GeometrySurrogate::domain(std::size_t dof_index) const {
  if (dof_index >= dofs_.size()) throw std::invalid_argument("surrogate: bad DOF index");
  if (std::holds_alternative<CubicSpline1D>(spline_)) {
    const auto& sp = std::get<CubicSpline1D>(spline_);
    return {sp.xmin(), sp.xmax()};
  }
  const auto& sp = std::get<CubicSpline2D>(spline_);
  return dof_index == 0 ? std::pair{sp.amin(), sp.amax()} : std::pair{sp.bmin(), sp.bmax()};
}

std::array<double, 2> GeometrySurrogate::clamp_angles(std::span<const double> angles,
                                                      bool* clamped) const {
  if (angles.size() != dofs_.size()) {
    throw std::invalid_argument("surrogate: expected " + std::to_string(dofs_.size()) +
                                " angles, got " + std::to_string(angles.size()));
  }
  std::array<double, 2> out{0.0, 0.0};
  for (std::size_t d = 0; d < dofs_.size(); ++d) {
    if (std::isnan(angles[d])) throw std::invalid_argument("surrogate: NaN joint angle");
    const auto [lo, hi] = domain(d);
    out[d] = std::clamp(angles[d], lo, hi);
    if (clamped && out[d] != angles[d]) *clamped = true;
  }
  return out;
}

double GeometrySurrogate::lmt(std::span<const double> angles, bool* clamped) const {
  const auto a = clamp_angles(angles, clamped);
  if (std::holds_alternative<CubicSpline1D>(spline_)) {
    return std::get<CubicSpline1D>(spline_).value(a[0]);
  }
  return std::get<CubicSpline2D>(spline_).value(a[0], a[1]);
}

double GeometrySurrogate::dlmt_dtheta(std::span<const double> angles, std::size_t dof_index,
                                      bool* clamped) const {
  if (dof_index >= dofs_.size()) throw std::invalid_argument("surrogate: bad DOF index");
  const auto a = clamp_angles(angles, clamped);
  if (std::holds_alternative<CubicSpline1D>(spline_)) {
    return std::get<CubicSpline1D>(spline_).derivative(a[0]);
  }
  return std::get<CubicSpline2D>(spline_).derivative(a[0], a[1], static_cast<int>(dof_index));
}

double GeometrySurrogate::dlmt_dtheta(std::span<const double> angles, const std::string& joint,
                                      bool* clamped) const {
  const auto it = std::find(dofs_.begin(), dofs_.end(), joint);
  if (it == dofs_.end()) {
    throw std::invalid_argument("joint '" + joint + "' is not spanned by this MTU");
  }
  return dlmt_dtheta(angles, static_cast<std::size_t>(it - dofs_.begin()), clamped);
}

}  // namespace nmbc
