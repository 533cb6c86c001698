#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <span>
#include <vector>

#include <json.hpp>

#include "shafttrack/error.hpp"

namespace shafttrack {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Rigid transform x -> R x + t. Rotation must be orthonormal with det +1.
class Pose {
 public:
  Pose() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  /// Throws InvalidArgument if `rotation` is not a proper rotation (1e-9).
  Pose(const Mat3& rotation, const Vec3& translation);

  static Pose identity() { return {}; }
  static Pose from_translation(const Vec3& t) { return Pose(Mat3::Identity(), t); }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 transform_point(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 transform_direction(const Vec3& d) const { return rotation_ * d; }

  Pose inverse() const;
  Pose operator*(const Pose& rhs) const;

  Eigen::Matrix4d matrix() const;

 private:
  struct Unchecked {};
  Pose(const Mat3& r, const Vec3& t, Unchecked) : rotation_(r), translation_(t) {}

  Mat3 rotation_;
  Vec3 translation_;
};

bool is_rotation(const Mat3& r, double tol = 1e-9);

/// Lumped-error state: translation b and axis-angle w, kept on the chart |w| < pi.
class LumpedErrorParams {
 public:
  LumpedErrorParams() : b_(Vec3::Zero()), w_(Vec3::Zero()) {}
  LumpedErrorParams(const Vec3& b, const Vec3& w) : b_(b), w_(canonicalize_axis_angle(w)) {}

  static LumpedErrorParams from_vector(const Vec6& v) {
    return {v.head<3>(), v.tail<3>()};
  }

  const Vec3& b() const { return b_; }
  const Vec3& w() const { return w_; }
  Vec6 as_vector() const {
    Vec6 v;
    v << b_, w_;
    return v;
  }

  /// w <- w (1 - 2 pi / |w|) until |w| < pi; same rotation, canonical chart.
  static Vec3 canonicalize_axis_angle(Vec3 w);

 private:
  Vec3 b_;
  Vec3 w_;
};

Pose pose_from_params(const LumpedErrorParams& p);

/// Throws AngleNearPi when the rotation angle is within 1e-6 of pi.
LumpedErrorParams params_from_pose(const Pose& pose);

Mat3 rotation_from_axis_angle(const Vec3& w);

enum class JointType { Revolute, Prismatic };

/// One link transform of a serial chain: T(q) = fixed_offset * motion(q).
struct Joint {
  JointType type = JointType::Revolute;
  Vec3 axis = Vec3::UnitZ();  ///< unit length
  Pose fixed_offset;

  static Joint revolute(const Vec3& axis, const Pose& offset = Pose());
  static Joint prismatic(const Vec3& axis, const Pose& offset = Pose());

  Pose transform(double q) const;
};

struct KinematicChain {
  std::vector<Joint> joints;
  Vec3 tip_point = Vec3::Zero();  ///< in the last joint frame (m)

  std::size_t size() const { return joints.size(); }
};

/// E * prod_{i < joint_count} T_i(q_i). `joint_count` defaults to the whole
/// chain; pass k+1 to stop at joint k. q must have one entry per chain joint.
Pose forward_kinematics(const KinematicChain& chain, std::span<const double> q, const Pose& lumped,
                        std::size_t joint_count);
Pose forward_kinematics(const KinematicChain& chain, std::span<const double> q, const Pose& lumped);

KinematicChain chain_from_json(const nlohmann::json& j);
nlohmann::json chain_to_json(const KinematicChain& chain);
Pose pose_from_json(const nlohmann::json& j);
nlohmann::json pose_to_json(const Pose& pose);

struct CameraIntrinsics {
  double fx = 1000.0;
  double fy = 1000.0;
  double cu = 960.0;
  double cv = 540.0;
  int width = 1920;
  int height = 1080;

  /// Throws InvalidArgument unless fx, fy > 0 and the principal point is in the image.
  void validate() const;
  double diagonal() const;
};

Vec2 pixel_to_unit(const Vec2& px, const CameraIntrinsics& k);
Vec2 unit_to_pixel(const Vec2& xy, const CameraIntrinsics& k);

/// Pinhole projection of a camera-frame point to pixels. Throws BehindCamera if z <= 0.
Vec2 project_point(const Vec3& p_cam, const CameraIntrinsics& k);

}  // namespace shafttrack
