#include "shafttrack/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace shafttrack {

namespace {

using nlohmann::json;

Vec3 vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::SchemaError, std::string(what) + ": expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json to_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

LumpedErrorParams params_from(const json& j, const char* what) {
  if (!j.contains("b")) throw Error(ErrorCode::SchemaError, std::string(what) + ": missing field 'b'");
  if (!j.contains("w")) throw Error(ErrorCode::SchemaError, std::string(what) + ": missing field 'w'");
  return {vec3(j.at("b"), what), vec3(j.at("w"), what)};
}

json params_to(const LumpedErrorParams& p) { return {{"b", to_json(p.b())}, {"w", to_json(p.w())}}; }

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Mat6 diag6(double translation_var, double rotation_var) {
  Vec6 d;
  d << translation_var, translation_var, translation_var, rotation_var, rotation_var, rotation_var;
  return d.asDiagonal();
}

}  // namespace

double JointTrajectory::at(long frame) const {
  if (!(period > 0.0)) return offset;
  return offset + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(frame) / period + phase);
}

void ScenarioConfig::validate() const {
  if (n_frames < 1) throw Error(ErrorCode::InvalidArgument, "scenario: n_frames must be >= 1");
  if (chain.joints.empty()) throw Error(ErrorCode::InvalidArgument, "scenario: chain needs at least one joint");
  if (shaft_joint_index >= chain.size()) {
    throw Error(ErrorCode::InvalidArgument, "scenario: shaft parent joint index out of range");
  }
  if (joint_trajectory.size() != chain.size()) {
    throw Error(ErrorCode::InvalidArgument, "scenario: need one trajectory per joint");
  }
  if (!(span_min < span_max)) throw Error(ErrorCode::InvalidArgument, "scenario: span_min must be < span_max");
  shaft.validate();
  camera.validate();
  detector.validate();
  MotionParams{gt_walk_cov}.validate();
}

void ObservationConfig::validate() const {
  extraction.validate();
  ransac.validate();
  polar.validate();
  intensity.validate();
}

void AppConfig::validate() const {
  scenario.validate();
  filter.validate();
  motion.validate();
  observation.validate();
  if (threads < 1) throw Error(ErrorCode::InvalidArgument, "threads must be >= 1");
}

AppConfig default_config() {
  AppConfig cfg;
  ScenarioConfig& s = cfg.scenario;
  s.chain.joints = {
      Joint::revolute(Vec3::UnitY()),    // outer yaw about the remote centre
      Joint::revolute(Vec3::UnitX()),    // outer pitch
      Joint::prismatic(Vec3::UnitZ()),   // insertion
      Joint::revolute(Vec3::UnitZ()),    // shaft roll
  };
  s.chain.tip_point = Vec3(0.002, 0.0, 0.010);
  s.shaft = {Vec3::Zero(), Vec3::UnitZ(), 0.0042};
  s.shaft_joint_index = 2;
  s.span_min = -0.08;
  s.span_max = -0.005;
  s.camera = CameraIntrinsics{};
  s.n_frames = 300;
  s.gt_initial = LumpedErrorParams(Vec3(-0.09, 0.01, 0.10), Vec3(0.15, 1.05, 0.05));
  s.gt_walk_cov = diag6(1e-8, 1e-8);
  s.joint_trajectory = {
      {0.0, 0.25, 150.0, 0.0},
      {0.0, 0.20, 110.0, 1.0},
      {0.10, 0.02, 80.0, 0.5},
      {0.0, 0.60, 60.0, 0.0},
  };
  s.detector = SyntheticDetectorParams{};
  s.seed = 1;

  cfg.filter.n_particles = 500;
  cfg.filter.resample_ess_fraction = 0.5;
  cfg.filter.seed = 7;
  cfg.filter.init_mean = LumpedErrorParams(s.gt_initial.b() + Vec3(0.008, -0.006, 0.010),
                                           s.gt_initial.w() + Vec3(0.01, -0.012, 0.008));
  cfg.filter.init_cov = diag6(1e-4, 1e-4);
  cfg.motion.cov = diag6(1e-6, 1e-6);
  return cfg;
}

Mat6 mat6_from_json(const json& j) {
  Mat6 m = Mat6::Zero();
  if (j.is_array() && j.size() == 6 && j[0].is_number()) {
    for (int i = 0; i < 6; ++i) m(i, i) = j[static_cast<std::size_t>(i)].get<double>();
    return m;
  }
  if (j.is_array() && j.size() == 6) {
    for (int r = 0; r < 6; ++r) {
      const auto& row = j[static_cast<std::size_t>(r)];
      if (!row.is_array() || row.size() != 6) throw Error(ErrorCode::SchemaError, "covariance: expected 6x6");
      for (int c = 0; c < 6; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
  }
  throw Error(ErrorCode::SchemaError, "covariance: expected a 6-vector diagonal or a 6x6 matrix");
}

json mat6_to_json(const Mat6& m) {
  const Mat6 off = m - Mat6(m.diagonal().asDiagonal());
  json out = json::array();
  if (off.isZero(0.0)) {
    for (int i = 0; i < 6; ++i) out.push_back(m(i, i));
    return out;
  }
  for (int r = 0; r < 6; ++r) {
    json row = json::array();
    for (int c = 0; c < 6; ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

AppConfig config_from_json(const json& j) {
  AppConfig cfg = default_config();
  try {
    if (j.contains("scenario")) {
      const json& s = j.at("scenario");
      ScenarioConfig& sc = cfg.scenario;
      if (s.contains("chain")) sc.chain = chain_from_json(s.at("chain"));
      if (s.contains("shaft")) {
        const json& sh = s.at("shaft");
        if (sh.contains("p0")) sc.shaft.p0 = vec3(sh.at("p0"), "shaft.p0");
        if (sh.contains("d")) sc.shaft.d = vec3(sh.at("d"), "shaft.d");
        read_opt(sh, "r", sc.shaft.r);
        read_opt(sh, "parent_joint", sc.shaft_joint_index);
        if (sh.contains("span")) {
          const json& sp = sh.at("span");
          if (!sp.is_array() || sp.size() != 2) throw Error(ErrorCode::SchemaError, "shaft.span: expected [min, max]");
          sc.span_min = sp[0].get<double>();
          sc.span_max = sp[1].get<double>();
        }
      }
      if (s.contains("camera")) {
        const json& c = s.at("camera");
        read_opt(c, "fx", sc.camera.fx);
        read_opt(c, "fy", sc.camera.fy);
        read_opt(c, "cu", sc.camera.cu);
        read_opt(c, "cv", sc.camera.cv);
        read_opt(c, "width", sc.camera.width);
        read_opt(c, "height", sc.camera.height);
      }
      read_opt(s, "n_frames", sc.n_frames);
      if (s.contains("gt_initial")) sc.gt_initial = params_from(s.at("gt_initial"), "gt_initial");
      if (s.contains("gt_walk_cov")) sc.gt_walk_cov = mat6_from_json(s.at("gt_walk_cov"));
      if (s.contains("joint_trajectory")) {
        sc.joint_trajectory.clear();
        for (const auto& t : s.at("joint_trajectory")) {
          JointTrajectory jt;
          read_opt(t, "offset", jt.offset);
          read_opt(t, "amplitude", jt.amplitude);
          read_opt(t, "period", jt.period);
          read_opt(t, "phase", jt.phase);
          sc.joint_trajectory.push_back(jt);
        }
      }
      if (s.contains("detector")) {
        const json& d = s.at("detector");
        read_opt(d, "pixel_noise_sigma", sc.detector.pixel_noise_sigma);
        read_opt(d, "outlier_count", sc.detector.outlier_count);
        read_opt(d, "endpoint_dropout_prob", sc.detector.endpoint_dropout_prob);
        read_opt(d, "segment_extent", sc.detector.segment_extent);
        read_opt(d, "heatmap_radius", sc.detector.heatmap_radius);
        read_opt(d, "outlier_min_intensity", sc.detector.outlier_min_intensity);
      }
      read_opt(s, "seed", sc.seed);
    }
    if (j.contains("filter")) {
      const json& f = j.at("filter");
      read_opt(f, "n_particles", cfg.filter.n_particles);
      read_opt(f, "resample_ess_fraction", cfg.filter.resample_ess_fraction);
      read_opt(f, "seed", cfg.filter.seed);
      if (f.contains("init_mean")) cfg.filter.init_mean = params_from(f.at("init_mean"), "filter.init_mean");
      if (f.contains("init_cov")) cfg.filter.init_cov = mat6_from_json(f.at("init_cov"));
      if (f.contains("motion_cov")) cfg.motion.cov = mat6_from_json(f.at("motion_cov"));
    }
    if (j.contains("observation")) {
      const json& o = j.at("observation");
      ObservationConfig& oc = cfg.observation;
      read_opt(o, "alpha_e", oc.extraction.alpha_e);
      read_opt(o, "alpha_l", oc.extraction.alpha_l);
      read_opt(o, "beta", oc.extraction.beta);
      read_opt(o, "gamma_rho", oc.polar.gamma_rho);
      read_opt(o, "gamma_theta", oc.polar.gamma_theta);
      read_opt(o, "sigma", oc.intensity.sigma);
      if (o.contains("ransac")) {
        const json& r = o.at("ransac");
        read_opt(r, "passes", oc.ransac.passes);
        read_opt(r, "min_samples", oc.ransac.min_samples);
        read_opt(r, "residual_threshold", oc.ransac.residual_threshold);
        read_opt(r, "max_trials", oc.ransac.max_trials);
        read_opt(r, "seed", oc.ransac.seed);
      }
    }
    read_opt(j, "threads", cfg.threads);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json config_to_json(const AppConfig& cfg) {
  const ScenarioConfig& s = cfg.scenario;
  json traj = json::array();
  for (const auto& t : s.joint_trajectory) {
    traj.push_back({{"offset", t.offset}, {"amplitude", t.amplitude}, {"period", t.period}, {"phase", t.phase}});
  }
  const auto& o = cfg.observation;
  return {
      {"scenario",
       {{"chain", chain_to_json(s.chain)},
        {"shaft",
         {{"p0", to_json(s.shaft.p0)},
          {"d", to_json(s.shaft.d)},
          {"r", s.shaft.r},
          {"parent_joint", s.shaft_joint_index},
          {"span", {s.span_min, s.span_max}}}},
        {"camera",
         {{"fx", s.camera.fx},
          {"fy", s.camera.fy},
          {"cu", s.camera.cu},
          {"cv", s.camera.cv},
          {"width", s.camera.width},
          {"height", s.camera.height}}},
        {"n_frames", s.n_frames},
        {"gt_initial", params_to(s.gt_initial)},
        {"gt_walk_cov", mat6_to_json(s.gt_walk_cov)},
        {"joint_trajectory", traj},
        {"detector",
         {{"pixel_noise_sigma", s.detector.pixel_noise_sigma},
          {"outlier_count", s.detector.outlier_count},
          {"endpoint_dropout_prob", s.detector.endpoint_dropout_prob},
          {"segment_extent", s.detector.segment_extent},
          {"heatmap_radius", s.detector.heatmap_radius},
          {"outlier_min_intensity", s.detector.outlier_min_intensity}}},
        {"seed", s.seed}}},
      {"filter",
       {{"n_particles", cfg.filter.n_particles},
        {"resample_ess_fraction", cfg.filter.resample_ess_fraction},
        {"seed", cfg.filter.seed},
        {"init_mean", params_to(cfg.filter.init_mean)},
        {"init_cov", mat6_to_json(cfg.filter.init_cov)},
        {"motion_cov", mat6_to_json(cfg.motion.cov)}}},
      {"observation",
       {{"alpha_e", o.extraction.alpha_e},
        {"alpha_l", o.extraction.alpha_l},
        {"beta", o.extraction.beta},
        {"gamma_rho", o.polar.gamma_rho},
        {"gamma_theta", o.polar.gamma_theta},
        {"sigma", o.intensity.sigma},
        {"ransac",
         {{"passes", o.ransac.passes},
          {"min_samples", o.ransac.min_samples},
          {"residual_threshold", o.ransac.residual_threshold},
          {"max_trials", o.ransac.max_trials},
          {"seed", o.ransac.seed}}}}},
      {"threads", cfg.threads},
  };
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

}  // namespace shafttrack
