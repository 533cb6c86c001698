#include "shafttrack/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace shafttrack {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::AngleNearPi: return "AngleNearPi";
    case ErrorCode::JointCountMismatch: return "JointCountMismatch";
    case ErrorCode::CameraInsideCylinder: return "CameraInsideCylinder";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::DegenerateSegment: return "DegenerateSegment";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::NoDetections: return "NoDetections";
    case ErrorCode::NoPoints: return "NoPoints";
    case ErrorCode::AllParticlesInvalid: return "AllParticlesInvalid";
    case ErrorCode::DegenerateWeights: return "DegenerateWeights";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ProjectionInvalid: return "ProjectionInvalid";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

Pose::Pose(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!is_rotation(rotation)) {
    throw Error(ErrorCode::InvalidArgument, "Pose: rotation is not orthonormal with det +1");
  }
  if (!translation.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "Pose: non-finite translation");
  }
}

Pose Pose::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return Pose(rt, -(rt * translation_), Unchecked{});
}

Pose Pose::operator*(const Pose& rhs) const {
  return Pose(rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_, Unchecked{});
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Vec3 LumpedErrorParams::canonicalize_axis_angle(Vec3 w) {
  constexpr double pi = std::numbers::pi;
  const double n = w.norm();
  if (!(n >= pi)) return w;  // also passes NaN through untouched
  const double turns = std::floor((n + pi) / (2.0 * pi));
  return w * (1.0 - 2.0 * pi * turns / n);
}

Mat3 rotation_from_axis_angle(const Vec3& w) {
  const double theta = w.norm();
  Mat3 k;
  k << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  // Taylor forms below 1e-6 keep the result exact to double precision.
  double a, b;
  if (theta < 1e-6) {
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  return Mat3::Identity() + a * k + b * k * k;
}

Pose pose_from_params(const LumpedErrorParams& p) {
  return Pose(rotation_from_axis_angle(p.w()), p.b());
}

LumpedErrorParams params_from_pose(const Pose& pose) {
  const Mat3& r = pose.rotation();
  const Vec3 v(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double s = 0.5 * v.norm();                 // sin(theta)
  const double c = 0.5 * (r.trace() - 1.0);        // cos(theta)
  const double theta = std::atan2(s, c);
  if (theta >= std::numbers::pi - 1e-6) {
    throw Error(ErrorCode::AngleNearPi, "params_from_pose: rotation angle too close to pi");
  }
  Vec3 w;
  if (theta < 1e-6) {
    w = 0.5 * (1.0 + theta * theta / 6.0) * v;
  } else {
    w = (0.5 * theta / std::sin(theta)) * v;
  }
  return LumpedErrorParams(pose.translation(), w);
}

Joint Joint::revolute(const Vec3& axis, const Pose& offset) {
  if (!(axis.norm() > 0.0)) throw Error(ErrorCode::InvalidArgument, "joint axis must be nonzero");
  return Joint{JointType::Revolute, axis.normalized(), offset};
}

Joint Joint::prismatic(const Vec3& axis, const Pose& offset) {
  if (!(axis.norm() > 0.0)) throw Error(ErrorCode::InvalidArgument, "joint axis must be nonzero");
  return Joint{JointType::Prismatic, axis.normalized(), offset};
}

Pose Joint::transform(double q) const {
  if (type == JointType::Revolute) {
    return fixed_offset * Pose(rotation_from_axis_angle(axis * q), Vec3::Zero());
  }
  return fixed_offset * Pose::from_translation(axis * q);
}

Pose forward_kinematics(const KinematicChain& chain, std::span<const double> q, const Pose& lumped,
                        std::size_t joint_count) {
  if (q.size() != chain.size()) {
    throw Error(ErrorCode::JointCountMismatch,
                "forward_kinematics: got " + std::to_string(q.size()) + " joint values for " +
                    std::to_string(chain.size()) + " joints");
  }
  if (joint_count > chain.size()) {
    throw Error(ErrorCode::InvalidArgument, "forward_kinematics: joint_count exceeds chain length");
  }
  Pose out = lumped;
  for (std::size_t i = 0; i < joint_count; ++i) out = out * chain.joints[i].transform(q[i]);
  return out;
}

Pose forward_kinematics(const KinematicChain& chain, std::span<const double> q, const Pose& lumped) {
  return forward_kinematics(chain, q, lumped, chain.size());
}

namespace {

Vec3 vec3_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::SchemaError, std::string(what) + ": expected a 3-vector");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

Pose pose_from_json(const nlohmann::json& j) {
  // Accepts a flat 12-element row-major 3x4 array or a nested [[4],[4],[4]].
  std::vector<double> flat;
  if (j.is_array() && j.size() == 3 && j[0].is_array()) {
    for (const auto& row : j) {
      if (!row.is_array() || row.size() != 4) {
        throw Error(ErrorCode::SchemaError, "fixed_offset: expected 3x4 rows");
      }
      for (const auto& v : row) flat.push_back(v.get<double>());
    }
  } else if (j.is_array() && j.size() == 12) {
    for (const auto& v : j) flat.push_back(v.get<double>());
  } else {
    throw Error(ErrorCode::SchemaError, "fixed_offset: expected a 3x4 row-major array");
  }
  Mat3 r;
  Vec3 t;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) r(row, col) = flat[static_cast<std::size_t>(row * 4 + col)];
    t(row) = flat[static_cast<std::size_t>(row * 4 + 3)];
  }
  return Pose(r, t);
}

nlohmann::json pose_to_json(const Pose& pose) {
  nlohmann::json out = nlohmann::json::array();
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) out.push_back(pose.rotation()(row, col));
    out.push_back(pose.translation()(row));
  }
  return out;
}

KinematicChain chain_from_json(const nlohmann::json& j) {
  if (!j.contains("joints")) throw Error(ErrorCode::SchemaError, "chain: missing field 'joints'");
  if (!j.contains("tip_point")) throw Error(ErrorCode::SchemaError, "chain: missing field 'tip_point'");
  KinematicChain chain;
  for (const auto& jj : j.at("joints")) {
    if (!jj.contains("type")) throw Error(ErrorCode::SchemaError, "joint: missing field 'type'");
    if (!jj.contains("axis")) throw Error(ErrorCode::SchemaError, "joint: missing field 'axis'");
    const auto type = jj.at("type").get<std::string>();
    const Vec3 axis = vec3_from_json(jj.at("axis"), "joint axis");
    const Pose offset = jj.contains("fixed_offset") ? pose_from_json(jj.at("fixed_offset")) : Pose();
    if (type == "revolute") {
      chain.joints.push_back(Joint::revolute(axis, offset));
    } else if (type == "prismatic") {
      chain.joints.push_back(Joint::prismatic(axis, offset));
    } else {
      throw Error(ErrorCode::SchemaError, "joint: unknown type '" + type + "'");
    }
  }
  if (chain.joints.empty()) throw Error(ErrorCode::SchemaError, "chain: at least one joint required");
  chain.tip_point = vec3_from_json(j.at("tip_point"), "tip_point");
  return chain;
}

nlohmann::json chain_to_json(const KinematicChain& chain) {
  nlohmann::json joints = nlohmann::json::array();
  for (const auto& jt : chain.joints) {
    joints.push_back({{"type", jt.type == JointType::Revolute ? "revolute" : "prismatic"},
                      {"axis", {jt.axis.x(), jt.axis.y(), jt.axis.z()}},
                      {"fixed_offset", pose_to_json(jt.fixed_offset)}});
  }
  return {{"joints", joints},
          {"tip_point", {chain.tip_point.x(), chain.tip_point.y(), chain.tip_point.z()}}};
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorCode::InvalidArgument, "camera: fx, fy must be > 0");
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidArgument, "camera: bad image size");
  if (!(cu >= 0.0 && cu < width && cv >= 0.0 && cv < height)) {
    throw Error(ErrorCode::InvalidArgument, "camera: principal point outside the image");
  }
}

double CameraIntrinsics::diagonal() const {
  return std::hypot(static_cast<double>(width), static_cast<double>(height));
}

Vec2 pixel_to_unit(const Vec2& px, const CameraIntrinsics& k) {
  return {(px.x() - k.cu) / k.fx, (px.y() - k.cv) / k.fy};
}

Vec2 unit_to_pixel(const Vec2& xy, const CameraIntrinsics& k) {
  return {xy.x() * k.fx + k.cu, xy.y() * k.fy + k.cv};
}

Vec2 project_point(const Vec3& p_cam, const CameraIntrinsics& k) {
  if (!(p_cam.z() > 0.0)) throw Error(ErrorCode::BehindCamera, "project_point: point behind camera");
  return unit_to_pixel(Vec2(p_cam.x() / p_cam.z(), p_cam.y() / p_cam.z()), k);
}

}  // namespace shafttrack
