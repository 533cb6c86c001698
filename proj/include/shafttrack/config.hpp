#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "shafttrack/detection.hpp"
#include "shafttrack/geometry.hpp"
#include "shafttrack/observation.hpp"
#include "shafttrack/particle_filter.hpp"

namespace shafttrack {

/// q(t) = offset + amplitude * sin(2 pi t / period + phase); period <= 0 holds q at offset.
struct JointTrajectory {
  double offset = 0.0;
  double amplitude = 0.0;
  double period = 0.0;  ///< frames
  double phase = 0.0;   ///< radians

  double at(long frame) const;
};

struct ScenarioConfig {
  KinematicChain chain;
  CylinderSpec shaft;             ///< in the frame after `shaft_joint_index`
  std::size_t shaft_joint_index = 0;
  double span_min = -0.08;        ///< visible shaft extent along the axis (m)
  double span_max = -0.005;
  CameraIntrinsics camera;
  int n_frames = 300;
  LumpedErrorParams gt_initial;
  Mat6 gt_walk_cov = Mat6::Zero();
  std::vector<JointTrajectory> joint_trajectory;
  SyntheticDetectorParams detector;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ObservationConfig {
  ExtractionParams extraction;
  RansacParams ransac;
  PolarObsParams polar;
  IntensityObsParams intensity;

  void validate() const;
};

/// Everything one CLI invocation needs; mirrors the JSON config document.
struct AppConfig {
  ScenarioConfig scenario;
  FilterConfig filter;
  MotionParams motion;
  ObservationConfig observation;
  int threads = 1;

  void validate() const;
};

/// Calibrated synthetic scene: a four-joint tool (yaw, pitch, insertion, roll)
/// seen by a 1920x1080 camera, with the filter started off the ground truth.
AppConfig default_config();

/// Missing keys keep the default_config() value. Throws SchemaError.
AppConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const AppConfig& cfg);
AppConfig load_config(const std::string& path);

Mat6 mat6_from_json(const nlohmann::json& j);
nlohmann::json mat6_to_json(const Mat6& m);

}  // namespace shafttrack
