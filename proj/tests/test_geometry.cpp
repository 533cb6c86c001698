#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "shafttrack/geometry.hpp"

using namespace shafttrack;

namespace {

// Independent rotation oracle: Eigen's angle-axis, not our Rodrigues code.
Mat3 oracle_rotation(const Vec3& w) {
  const double a = w.norm();
  if (a == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(a, w / a).toRotationMatrix();
}

Vec3 random_w(std::mt19937_64& rng, double max_angle) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, max_angle);
  Vec3 axis(n(rng), n(rng), n(rng));
  return axis.normalized() * u(rng);
}

Pose random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return pose_from_params(LumpedErrorParams(Vec3(u(rng), u(rng), u(rng)), random_w(rng, 3.0)));
}

}  // namespace

TEST_CASE("zero params give the identity pose") {
  const Pose p = pose_from_params(LumpedErrorParams());
  CHECK((p.matrix() - Eigen::Matrix4d::Identity()).norm() == 0.0);
}

TEST_CASE("quarter turn about z plus translation") {
  const Pose p = pose_from_params(LumpedErrorParams(Vec3(1, 2, 3), Vec3(0, 0, std::numbers::pi / 2)));
  const Vec3 x = p.transform_point(Vec3(1, 0, 0));
  CHECK(x.x() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(x.y() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(x.z() == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("exponential map matches an angle-axis oracle") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const Vec3 w = random_w(rng, std::numbers::pi - 1e-3);
    CHECK((rotation_from_axis_angle(w) - oracle_rotation(w)).cwiseAbs().maxCoeff() < 1e-12);
  }
  // small-angle branch
  const Vec3 tiny(3e-8, -1e-8, 2e-8);
  CHECK((rotation_from_axis_angle(tiny) - oracle_rotation(tiny)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("params round-trip on the canonical chart") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const LumpedErrorParams p(Vec3(u(rng), u(rng), u(rng)), random_w(rng, std::numbers::pi - 0.01));
    const LumpedErrorParams q = params_from_pose(pose_from_params(p));
    CHECK((q.as_vector() - p.as_vector()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("pose round-trip through the log map") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 200; ++i) {
    const Pose t = random_pose(rng);
    const Pose back = pose_from_params(params_from_pose(t));
    CHECK((back.matrix() - t.matrix()).cwiseAbs().maxCoeff() < 1e-9);
  }
  CHECK(params_from_pose(Pose()).as_vector().norm() == 0.0);
  const auto tr = params_from_pose(Pose::from_translation(Vec3(0.1, 0, 0)));
  CHECK(tr.b().x() == 0.1);
  CHECK(tr.w().norm() == 0.0);
}

TEST_CASE("rotation by pi is rejected by the log map") {
  const Pose half(oracle_rotation(Vec3(0, std::numbers::pi, 0)), Vec3::Zero());
  try {
    params_from_pose(half);
    FAIL("expected AngleNearPi");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AngleNearPi);
  }
}

TEST_CASE("axis-angle outside the chart is re-canonicalized") {
  const Vec3 w(0, 0, 1.5 * std::numbers::pi);
  const LumpedErrorParams p(Vec3::Zero(), w);
  CHECK(p.w().norm() < std::numbers::pi);
  CHECK(p.w().z() == doctest::Approx(-0.5 * std::numbers::pi).epsilon(1e-12));
  CHECK((rotation_from_axis_angle(p.w()) - oracle_rotation(w)).cwiseAbs().maxCoeff() < 1e-12);
  // several turns
  const Vec3 big = Vec3(1, 2, -2).normalized() * 7.5 * std::numbers::pi;
  const LumpedErrorParams q(Vec3::Zero(), big);
  CHECK(q.w().norm() < std::numbers::pi);
  CHECK((rotation_from_axis_angle(q.w()) - oracle_rotation(big)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("non-rotation matrices are rejected") {
  Mat3 m = Mat3::Identity();
  m(0, 0) = -1.0;  // reflection
  CHECK_THROWS_AS(Pose(m, Vec3::Zero()), Error);
  CHECK_THROWS_AS(Pose(Mat3::Identity() * 1.001, Vec3::Zero()), Error);
  CHECK_FALSE(is_rotation(m));
}

TEST_CASE("composition is associative and rotations preserve norms") {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Pose a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    CHECK((((a * b) * c).matrix() - (a * (b * c)).matrix()).cwiseAbs().maxCoeff() < 1e-12);
    const Vec3 v(n(rng), n(rng), n(rng));
    CHECK(std::abs(a.transform_direction(v).norm() - v.norm()) < 1e-12);
    CHECK(((a * a.inverse()).matrix() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("forward kinematics") {
  SUBCASE("identity joints and lumped error") {
    KinematicChain chain;
    chain.joints = {Joint::revolute(Vec3::UnitX()), Joint::prismatic(Vec3::UnitY())};
    const std::vector<double> q = {0.0, 0.0};
    CHECK((forward_kinematics(chain, q, Pose()).matrix() - Eigen::Matrix4d::Identity()).norm() == 0.0);
  }
  SUBCASE("single prismatic joint") {
    KinematicChain chain;
    chain.joints = {Joint::prismatic(Vec3::UnitZ())};
    const std::vector<double> q = {0.05};
    const Pose p = forward_kinematics(chain, q, Pose());
    CHECK(p.translation().isApprox(Vec3(0, 0, 0.05)));
    CHECK(p.rotation().isIdentity());
  }
  SUBCASE("matches a naive 4x4 product") {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      KinematicChain chain;
      chain.joints = {Joint::revolute(Vec3(u(rng), u(rng), u(rng)).normalized(), random_pose(rng)),
                      Joint::prismatic(Vec3(u(rng), u(rng), u(rng)).normalized(), random_pose(rng)),
                      Joint::revolute(Vec3(u(rng), u(rng), u(rng)).normalized(), random_pose(rng))};
      const std::vector<double> q = {u(rng) * 3, u(rng) * 0.2, u(rng) * 3};
      const Pose e = random_pose(rng);

      Eigen::Matrix4d oracle = e.matrix();
      for (std::size_t i = 0; i < 3; ++i) {
        const Joint& j = chain.joints[i];
        Eigen::Matrix4d motion = Eigen::Matrix4d::Identity();
        if (j.type == JointType::Revolute) {
          motion.topLeftCorner<3, 3>() = oracle_rotation(j.axis * q[i]);
        } else {
          motion.topRightCorner<3, 1>() = j.axis * q[i];
        }
        oracle = oracle * j.fixed_offset.matrix() * motion;
      }
      CHECK((forward_kinematics(chain, q, e).matrix() - oracle).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("partial chain and joint count mismatch") {
    KinematicChain chain;
    chain.joints = {Joint::prismatic(Vec3::UnitZ()), Joint::prismatic(Vec3::UnitX())};
    const std::vector<double> q = {0.1, 0.2};
    CHECK(forward_kinematics(chain, q, Pose(), 1).translation().isApprox(Vec3(0, 0, 0.1)));
    const std::vector<double> short_q = {0.1};
    try {
      forward_kinematics(chain, short_q, Pose());
      FAIL("expected JointCountMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::JointCountMismatch);
    }
  }
}

TEST_CASE("chain and pose JSON round-trip") {
  std::mt19937_64 rng(16);
  KinematicChain chain;
  chain.joints = {Joint::revolute(Vec3::UnitY(), random_pose(rng)), Joint::prismatic(Vec3::UnitZ())};
  chain.tip_point = Vec3(0.001, 0.002, 0.003);
  const KinematicChain back = chain_from_json(chain_to_json(chain));
  REQUIRE(back.size() == 2);
  CHECK(back.joints[0].type == JointType::Revolute);
  CHECK(back.joints[1].type == JointType::Prismatic);
  CHECK((back.joints[0].fixed_offset.matrix() - chain.joints[0].fixed_offset.matrix()).norm() < 1e-12);
  CHECK(back.tip_point == chain.tip_point);
  CHECK_THROWS_AS(chain_from_json(nlohmann::json::parse(R"({"joints": []})")), Error);
}

TEST_CASE("camera intrinsics") {
  const CameraIntrinsics k;
  CHECK(pixel_to_unit(Vec2(k.cu, k.cv), k) == Vec2(0, 0));
  CHECK(pixel_to_unit(Vec2(1960, 540), k) == Vec2(1.0, 0.0));
  CHECK(unit_to_pixel(Vec2(0, 0), k) == Vec2(960, 540));
  CHECK(unit_to_pixel(Vec2(1, 0), k) == Vec2(1960, 540));
  CHECK(k.diagonal() == doctest::Approx(std::sqrt(1920.0 * 1920.0 + 1080.0 * 1080.0)));

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1920.0);
  CameraIntrinsics odd{812.5, 790.25, 955.0, 530.5, 1920, 1080};
  for (int i = 0; i < 100; ++i) {
    const Vec2 px(u(rng), u(rng) * 0.5);
    CHECK((unit_to_pixel(pixel_to_unit(px, odd), odd) - px).cwiseAbs().maxCoeff() < 1e-12);
  }

  CameraIntrinsics bad = k;
  bad.fx = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = k;
  bad.cu = 1920.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(project_point(Vec3(0, 0, -1), k), Error);
}
