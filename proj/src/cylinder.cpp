#include "shafttrack/cylinder.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace shafttrack {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDiscriminantFloor = 1e-12;

bool polar_less(const PolarLine& x, const PolarLine& y) {
  if (x.theta != y.theta) return x.theta < y.theta;
  return x.rho < y.rho;
}

}  // namespace

void CylinderSpec::validate() const {
  if (std::abs(d.norm() - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "cylinder: |d| must be 1");
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "cylinder: radius must be > 0");
  if (!p0.allFinite()) throw Error(ErrorCode::InvalidArgument, "cylinder: non-finite p0");
}

ImplicitLine ImplicitLine::normalized(double a, double b, double c) {
  const double n = std::hypot(a, b);
  if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "implicit line with a = b = 0");
  a /= n;
  b /= n;
  c /= n;
  if (a < 0.0 || (a == 0.0 && b < 0.0)) {
    a = -a;
    b = -b;
    c = -c;
  }
  return {a, b, c};
}

PolarLine implicit_to_polar(const ImplicitLine& l) {
  const double n = std::hypot(l.a, l.b);
  double theta = std::atan2(l.b, l.a);
  double rho = -l.c / n;
  if (theta < 0.0) {
    theta += kPi;
    rho = -rho;
  } else if (theta >= kPi) {
    theta -= kPi;
    rho = -rho;
  }
  return {theta, rho};
}

ImplicitLine polar_to_implicit(const PolarLine& l) {
  return ImplicitLine::normalized(std::cos(l.theta), std::sin(l.theta), -l.rho);
}

CylinderSpec transform_cylinder(const Pose& t, const CylinderSpec& cyl) {
  return {t.transform_point(cyl.p0), t.transform_direction(cyl.d), cyl.r};
}

ProjectionStatus try_project_cylinder(const CylinderSpec& cyl, std::array<ImplicitLine, 2>& out) {
  const Vec3& p = cyl.p0;
  const Vec3& d = cyl.d;
  const double pd = p.dot(d);
  const double disc = p.dot(p) - pd * pd - cyl.r * cyl.r;
  if (!(disc > kDiscriminantFloor)) return ProjectionStatus::CameraInsideCylinder;
  // Nearest axis point to the camera centre must lie in front of it.
  const Vec3 nearest = p - pd * d;
  if (!(nearest.z() > 0.0)) return ProjectionStatus::BehindCamera;

  const double k = cyl.r / std::sqrt(disc);
  const Vec3 radial = k * nearest;  // r (p0 - (p0.d) d) / sqrt(disc)
  const Vec3 tangent(d.z() * p.y() - d.y() * p.z(), d.x() * p.z() - d.z() * p.x(),
                     d.y() * p.x() - d.x() * p.y());
  const Vec3 n1 = radial + tangent;
  const Vec3 n2 = radial - tangent;
  if (std::hypot(n1.x(), n1.y()) == 0.0 || std::hypot(n2.x(), n2.y()) == 0.0) {
    return ProjectionStatus::BehindCamera;
  }
  ImplicitLine l1 = ImplicitLine::normalized(n1.x(), n1.y(), n1.z());
  ImplicitLine l2 = ImplicitLine::normalized(n2.x(), n2.y(), n2.z());
  if (polar_less(implicit_to_polar(l2), implicit_to_polar(l1))) std::swap(l1, l2);
  out = {l1, l2};
  return ProjectionStatus::Ok;
}

std::array<ImplicitLine, 2> project_cylinder(const CylinderSpec& cyl_cam) {
  std::array<ImplicitLine, 2> out;
  switch (try_project_cylinder(cyl_cam, out)) {
    case ProjectionStatus::Ok: return out;
    case ProjectionStatus::CameraInsideCylinder:
      throw Error(ErrorCode::CameraInsideCylinder, "project_cylinder: camera inside cylinder");
    case ProjectionStatus::BehindCamera:
      throw Error(ErrorCode::BehindCamera, "project_cylinder: shaft behind camera");
  }
  return out;
}

PolarLine fit_line_tls(std::span<const Vec2> points) {
  if (points.size() < 2) throw Error(ErrorCode::InsufficientPoints, "fit_line_tls: need >= 2 points");
  Vec2 mean = Vec2::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
  for (const auto& p : points) {
    const Vec2 q = p - mean;
    scatter += q * q.transpose();
  }
  if (!(scatter.trace() > 0.0)) throw Error(ErrorCode::InsufficientPoints, "fit_line_tls: coincident points");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(scatter);
  const Vec2 normal = eig.eigenvectors().col(0);
  return implicit_to_polar(ImplicitLine::normalized(normal.x(), normal.y(), -normal.dot(mean)));
}

LinePair silhouette_oracle(const CylinderSpec& cyl, int n_sections, int n_circle) {
  if (n_sections < 16 || n_circle < 256) {
    throw Error(ErrorCode::InvalidArgument, "silhouette_oracle: need n_sections >= 16, n_circle >= 256");
  }
  const Vec3& d = cyl.d;
  const double pd = cyl.p0.dot(d);
  const Vec3 nearest = cyl.p0 - pd * d;
  const double h = nearest.norm();
  if (!(h * h - cyl.r * cyl.r > kDiscriminantFloor)) {
    throw Error(ErrorCode::CameraInsideCylinder, "silhouette_oracle: camera inside cylinder");
  }
  if (!(nearest.z() > 0.0)) throw Error(ErrorCode::BehindCamera, "silhouette_oracle: shaft behind camera");

  // Orthonormal basis of the cross-section plane.
  const Vec3 u = nearest / h;
  const Vec3 v = d.cross(u);

  // Projected centre-line: image of the plane spanned by the camera centre and the axis.
  const Vec3 axis_plane = cyl.p0.cross(d);
  const double axis_scale = std::hypot(axis_plane.x(), axis_plane.y());

  struct Sample {
    double x, y;
  };
  std::vector<std::vector<Sample>> sections;
  const double half_span = 0.5 * h;
  for (int s = 0; s < n_sections; ++s) {
    const double lambda = -half_span + 2.0 * half_span * s / (n_sections - 1);
    const Vec3 centre = nearest + lambda * d;
    std::vector<Sample> ring;
    ring.reserve(static_cast<std::size_t>(n_circle));
    bool valid = true;
    for (int k = 0; k < n_circle; ++k) {
      const double phi = 2.0 * kPi * k / n_circle;
      const Vec3 p = centre + cyl.r * (std::cos(phi) * u + std::sin(phi) * v);
      if (!(p.z() > 1e-6)) {
        valid = false;
        break;
      }
      ring.push_back({p.x() / p.z(), p.y() / p.z()});
    }
    if (valid) sections.push_back(std::move(ring));
  }
  if (sections.size() < static_cast<std::size_t>(n_sections / 2)) {
    throw Error(ErrorCode::BehindCamera, "silhouette_oracle: too few sections in front of the camera");
  }

  // First pass measures extremes across the projected centre-line; later
  // passes measure across each side's fitted line, which moves the picked
  // points onto the tangency points of the envelope.
  std::array<Vec3, 2> side_normal = {
      Vec3(axis_plane.x(), axis_plane.y(), axis_plane.z()) / axis_scale,
      Vec3(axis_plane.x(), axis_plane.y(), axis_plane.z()) / axis_scale};
  LinePair result{};
  for (int pass = 0; pass < 4; ++pass) {
    std::vector<Vec2> hi, lo;
    for (const auto& ring : sections) {
      auto dist = [&](const Sample& sm, int side) {
        const Vec3& n = side_normal[static_cast<std::size_t>(side)];
        return n.x() * sm.x + n.y() * sm.y + n.z();
      };
      const auto max_it = std::max_element(ring.begin(), ring.end(),
                                           [&](const Sample& a, const Sample& b) { return dist(a, 0) < dist(b, 0); });
      const auto min_it = std::min_element(ring.begin(), ring.end(),
                                           [&](const Sample& a, const Sample& b) { return dist(a, 1) < dist(b, 1); });
      hi.emplace_back(max_it->x, max_it->y);
      lo.emplace_back(min_it->x, min_it->y);
    }
    const PolarLine l_hi = fit_line_tls(hi);
    const PolarLine l_lo = fit_line_tls(lo);
    result = {l_hi, l_lo};
    // Re-orient each fitted normal so "max" keeps pointing away from the axis.
    const Vec2 axis_img = [&] {
      const Vec3 c = nearest;
      return Vec2(c.x() / c.z(), c.y() / c.z());
    }();
    auto oriented = [&](const PolarLine& l, bool away_positive) {
      Vec3 n(std::cos(l.theta), std::sin(l.theta), -l.rho);
      const double at_axis = n.x() * axis_img.x() + n.y() * axis_img.y() + n.z();
      // For the "max" side the axis must be on the negative side.
      if ((away_positive && at_axis > 0.0) || (!away_positive && at_axis < 0.0)) n = -n;
      return n;
    };
    side_normal = {oriented(l_hi, true), oriented(l_lo, false)};
  }
  if (polar_less(result[1], result[0])) std::swap(result[0], result[1]);
  return result;
}

PixelLineConversion polar_unit_to_pixel(const PolarLine& l, const CameraIntrinsics& k) {
  const double c = std::cos(l.theta);
  const double s = std::sin(l.theta);
  if (std::abs(k.fx - k.fy) <= 1e-9 * k.fx) {
    // cos u + sin v = f rho + cos cu + sin cv; theta is unchanged.
    return {{l.theta, k.fx * l.rho + c * k.cu + s * k.cv}, false};
  }
  // Anisotropic scaling: map two points of the line and rebuild it.
  const Vec2 foot(c * l.rho, s * l.rho);
  const Vec2 dir(-s, c);
  const Vec2 p1 = unit_to_pixel(foot, k);
  const Vec2 p2 = unit_to_pixel(foot + dir, k);
  const Vec2 t = p2 - p1;
  const ImplicitLine px = ImplicitLine::normalized(-t.y(), t.x(), t.y() * p1.x() - t.x() * p1.y());
  return {implicit_to_polar(px), true};
}

std::optional<LinePair> project_cylinder_to_pixels(const CylinderSpec& cyl_cam, const CameraIntrinsics& k,
                                                   ProjectionStatus* status) {
  std::array<ImplicitLine, 2> lines;
  const ProjectionStatus st = try_project_cylinder(cyl_cam, lines);
  if (status) *status = st;
  if (st != ProjectionStatus::Ok) return std::nullopt;
  return LinePair{polar_unit_to_pixel(implicit_to_polar(lines[0]), k).line,
                  polar_unit_to_pixel(implicit_to_polar(lines[1]), k).line};
}

}  // namespace shafttrack
