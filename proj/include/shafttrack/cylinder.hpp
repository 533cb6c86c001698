#pragma once

#include <array>
#include <optional>
#include <span>

#include "shafttrack/geometry.hpp"

namespace shafttrack {

/// Infinite cylinder: center-line through p0 with unit direction d, radius r.
struct CylinderSpec {
  Vec3 p0 = Vec3::Zero();
  Vec3 d = Vec3::UnitZ();
  double r = 0.004;

  /// Throws InvalidArgument unless |d| = 1 (1e-9) and r > 0.
  void validate() const;
};

/// a X + b Y + c = 0, normalized so a^2 + b^2 = 1 and the first nonzero of (a, b) is positive.
struct ImplicitLine {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;

  /// Normalizes arbitrary coefficients. Throws InvalidArgument if a = b = 0.
  static ImplicitLine normalized(double a, double b, double c);
};

/// Normal form cos(theta) x + sin(theta) y = rho with theta in [0, pi).
struct PolarLine {
  double theta = 0.0;
  double rho = 0.0;
};

using LinePair = std::array<PolarLine, 2>;

PolarLine implicit_to_polar(const ImplicitLine& l);
ImplicitLine polar_to_implicit(const PolarLine& l);

/// Signed distance convention shared by the point-to-line residuals.
inline double polar_residual(const PolarLine& l, double x, double y) {
  return std::cos(l.theta) * x + std::sin(l.theta) * y - l.rho;
}

CylinderSpec transform_cylinder(const Pose& t, const CylinderSpec& cyl);

enum class ProjectionStatus { Ok, CameraInsideCylinder, BehindCamera };

/// Non-throwing projection used in the per-particle hot path. On success the
/// two silhouette lines are returned ordered by (theta, rho).
ProjectionStatus try_project_cylinder(const CylinderSpec& cyl_cam, std::array<ImplicitLine, 2>& out);

/// Two silhouette edges of a camera-frame cylinder on the unit camera.
/// Throws CameraInsideCylinder or BehindCamera.
std::array<ImplicitLine, 2> project_cylinder(const CylinderSpec& cyl_cam);

/// Brute-force silhouette: samples cross-section circles along the axis,
/// projects them, keeps the extreme point on each side of every section and
/// fits a line per side. Independent of project_cylinder.
LinePair silhouette_oracle(const CylinderSpec& cyl_cam, int n_sections = 32, int n_circle = 512);

struct PixelLineConversion {
  PolarLine line;
  /// true when fx != fy and the conversion went through two sampled points
  bool via_sampled_points = false;
};

PixelLineConversion polar_unit_to_pixel(const PolarLine& l, const CameraIntrinsics& k);

/// Total-least-squares line through a point set (perpendicular residuals).
/// Throws InsufficientPoints for fewer than two distinct points.
PolarLine fit_line_tls(std::span<const Vec2> points);

/// Unit-camera polar lines of a camera-frame cylinder, converted to pixels.
/// Returns nullopt (with status set) when projection preconditions fail.
std::optional<LinePair> project_cylinder_to_pixels(const CylinderSpec& cyl_cam, const CameraIntrinsics& k,
                                                   ProjectionStatus* status = nullptr);

}  // namespace shafttrack
