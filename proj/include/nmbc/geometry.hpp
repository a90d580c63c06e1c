#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nmbc/spline.hpp"

namespace nmbc {

/// Sampled muscle-tendon lengths on a rectangular grid of joint angles,
/// one or two DOFs. `lmt` is knots[0].size() x knots[1].size() for two DOFs
/// and a single column for one.
struct GeometryGrid {
  std::string mtu;
  std::vector<std::string> dofs;          // 1 or 2 joint names, ordered
  std::vector<Eigen::VectorXd> knots;     // strictly increasing, >= 4 each
  Eigen::MatrixXd lmt;                    // meters, > 0

  void validate() const;  // throws ParseError naming the MTU
};

/// CSV with columns `<joint1>[,<joint2>],lmt`, one row per grid node,
/// row-major over the knots of joint1 (outer) and joint2 (inner).
GeometryGrid load_geometry_grid(const std::filesystem::path& path, const std::string& mtu);
void write_geometry_grid(const GeometryGrid& grid, const std::filesystem::path& path);

/// Differentiable surrogate for one MTU: joint angles -> muscle-tendon
/// length, with analytic partial derivatives for moment arms. Immutable and
/// thread-safe after fitting. Angles outside the fitted domain are clamped;
/// `clamped`, when given, reports that an input was clamped.
class GeometrySurrogate {
 public:
  static GeometrySurrogate fit(const GeometryGrid& grid);

  /// Muscle-tendon length (m) at the given angles (rad), one per DOF.
  double lmt(std::span<const double> angles, bool* clamped = nullptr) const;

  /// dL^MT/dtheta (m/rad) for the DOF at `dof_index`.
  double dlmt_dtheta(std::span<const double> angles, std::size_t dof_index,
                     bool* clamped = nullptr) const;
  /// Same, addressed by joint name; throws if the joint is not spanned.
  double dlmt_dtheta(std::span<const double> angles, const std::string& joint,
                     bool* clamped = nullptr) const;

  const std::vector<std::string>& dofs() const { return dofs_; }
  std::size_t dof_count() const { return dofs_.size(); }
  /// Fitted domain per DOF.
  std::pair<double, double> domain(std::size_t dof_index) const;

 private:
  std::vector<std::string> dofs_;
  std::variant<CubicSpline1D, CubicSpline2D> spline_;

  std::array<double, 2> clamp_angles(std::span<const double> angles, bool* clamped) const;
};

/// Spec-facing names.
inline GeometrySurrogate fit_surrogate(const GeometryGrid& grid) {
  return GeometrySurrogate::fit(grid);
}
inline double lmt(const GeometrySurrogate& s, std::span<const double> angles) {
  return s.lmt(angles);
}
/// Moment arm as the literal length sensitivity r = dL^MT/dtheta. The torque
/// stage negates this so a muscle that shortens as the angle grows produces
/// positive torque about that angle.
inline double moment_arm(const GeometrySurrogate& s, std::span<const double> angles,
                         const std::string& joint) {
  return s.dlmt_dtheta(angles, joint);
}

}  // namespace nmbc
