#include "shafttrack/harness.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "shafttrack/particle_filter.hpp"

namespace shafttrack {

namespace {

constexpr double kClipMargin = 2.0;  // px kept free at the image border

// Liang-Barsky clip of segment ab to [lo, hi]; false when nothing remains.
bool clip_segment(Vec2& a, Vec2& b, const Vec2& lo, const Vec2& hi) {
  const Vec2 d = b - a;
  double t0 = 0.0, t1 = 1.0;
  const double p[4] = {-d.x(), d.x(), -d.y(), d.y()};
  const double q[4] = {a.x() - lo.x(), hi.x() - a.x(), a.y() - lo.y(), hi.y() - a.y()};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
    if (t0 > t1) return false;
  }
  const Vec2 a0 = a;
  a = a0 + t0 * d;
  b = a0 + t1 * d;
  return true;
}

Vec2 foot_on_line(const Vec2& p, const PolarLine& l) {
  const Vec2 n(std::cos(l.theta), std::sin(l.theta));
  return p - polar_residual(l, p.x(), p.y()) * n;
}

nlohmann::ordered_json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

double tip_error_percent(double err_px, const CameraIntrinsics& k) {
  if (!(err_px >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tip_error_percent: error must be >= 0");
  return 100.0 * err_px / k.diagonal();
}

std::vector<double> accumulated_error(std::span<const double> per_frame_pct) {
  if (per_frame_pct.empty()) throw Error(ErrorCode::EmptyInput, "accumulated_error: empty input");
  std::vector<double> out(per_frame_pct.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < per_frame_pct.size(); ++k) {
    sum += per_frame_pct[k];
    out[k] = sum / static_cast<double>(k + 1);
  }
  return out;
}

MetricsReport summarize(std::vector<double> per_frame_error_px, const CameraIntrinsics& k) {
  MetricsReport m;
  m.per_frame_error_px = std::move(per_frame_error_px);
  for (double e : m.per_frame_error_px) m.per_frame_error_pct.push_back(tip_error_percent(e, k));
  if (m.per_frame_error_pct.empty()) return m;
  m.accumulated_error_pct = accumulated_error(m.per_frame_error_pct);
  const double n = static_cast<double>(m.per_frame_error_pct.size());
  m.mean_pct = m.accumulated_error_pct.back();
  double var = 0.0;
  for (double v : m.per_frame_error_pct) var += (v - m.mean_pct) * (v - m.mean_pct);
  m.std_pct = std::sqrt(var / n);
  return m;
}

ShaftModel shaft_model(const ScenarioConfig& s) {
  return {&s.chain, s.shaft, s.shaft_joint_index, s.camera};
}

std::optional<Vec2> tip_pixel(const ScenarioConfig& s, std::span<const double> q, const LumpedErrorParams& params) {
  const Pose tool = forward_kinematics(s.chain, q, pose_from_params(params));
  const Vec3 tip = tool.transform_point(s.chain.tip_point);
  if (!(tip.z() > 0.0)) return std::nullopt;
  return project_point(tip, s.camera);
}

std::vector<double> joint_values(const ScenarioConfig& s, long frame) {
  std::vector<double> q;
  q.reserve(s.joint_trajectory.size());
  for (const auto& jt : s.joint_trajectory) q.push_back(jt.at(frame));
  return q;
}

FrameRecord synthesize_frame(const ScenarioConfig& s, long t, const LumpedErrorParams& gt) {
  FrameRecord rec;
  rec.t = t;
  rec.q = joint_values(s, t);
  const ShaftModel model = shaft_model(s);
  const auto fail = [&](const std::string& why) {
    return Error(ErrorCode::ProjectionInvalid, "frame " + std::to_string(t) + ": " + why, -1, t);
  };

  const Pose shaft_frame = forward_kinematics(s.chain, rec.q, pose_from_params(gt), s.shaft_joint_index + 1);
  ProjectionStatus status = ProjectionStatus::Ok;
  const auto lines = project_cylinder_to_pixels(transform_cylinder(shaft_frame, s.shaft), s.camera, &status);
  if (!lines) {
    throw fail(status == ProjectionStatus::CameraInsideCylinder ? "camera inside the shaft cylinder"
                                                                : "shaft behind the camera");
  }
  const Vec3 end_a = shaft_frame.transform_point(s.shaft.p0 + s.span_min * s.shaft.d);
  const Vec3 end_b = shaft_frame.transform_point(s.shaft.p0 + s.span_max * s.shaft.d);
  if (!(end_a.z() > 0.0) || !(end_b.z() > 0.0)) throw fail("visible shaft span behind the camera");
  const Vec2 ca = project_point(end_a, s.camera);
  const Vec2 cb = project_point(end_b, s.camera);

  const Vec2 lo(kClipMargin, kClipMargin);
  const Vec2 hi(s.camera.width - kClipMargin, s.camera.height - kClipMargin);
  std::array<Segment, 2> spans;
  for (std::size_t k = 0; k < 2; ++k) {
    Vec2 a = foot_on_line(ca, (*lines)[k]);
    Vec2 b = foot_on_line(cb, (*lines)[k]);
    if (!clip_segment(a, b, lo, hi)) b = a;  // edge not visible: empty span
    spans[k] = {a, b};
  }
  const std::uint64_t det_seed = CounterRng::derive(s.seed, static_cast<std::uint64_t>(t), 0, CounterRng::Stream::Detector);
  rec.frame = synthesize_detection(*lines, spans, s.detector, s.camera.width, s.camera.height, det_seed);

  const auto tip = tip_pixel(s, rec.q, gt);
  if (!tip) throw fail("tool tip behind the camera");
  rec.gt = GroundTruth{gt.b(), gt.w(), *tip};
  (void)model;
  return rec;
}

std::vector<FrameRecord> generate_scenario(const ScenarioConfig& s) {
  s.validate();
  std::mt19937_64 rng(CounterRng::derive(s.seed, 0, 0, CounterRng::Stream::GroundTruth));
  std::normal_distribution<double> normal(0.0, 1.0);
  const Mat6 factor = covariance_factor(s.gt_walk_cov);

  std::vector<FrameRecord> out;
  out.reserve(static_cast<std::size_t>(s.n_frames));
  LumpedErrorParams gt = s.gt_initial;
  for (long t = 0; t < s.n_frames; ++t) {
    if (t > 0) {
      Vec6 z;
      for (int i = 0; i < 6; ++i) z(i) = normal(rng);
      gt = LumpedErrorParams::from_vector(gt.as_vector() + factor * z);
    }
    out.push_back(synthesize_frame(s, t, gt));
  }
  return out;
}

TrackingResult run_tracking(std::span<const FrameRecord> dataset, ObservationModelKind kind, const AppConfig& cfg) {
  cfg.validate();
  const ScenarioConfig& s = cfg.scenario;
  const ShaftModel model = shaft_model(s);
  const auto& oc = cfg.observation;

  TrackingResult res;
  res.kind = kind;
  std::vector<double> errors_px;
  ParticleSet ps = initialize(cfg.filter);
  const double resample_below = cfg.filter.resample_ess_fraction * static_cast<double>(cfg.filter.n_particles);

  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const FrameRecord& rec = dataset[i];
    const auto step = static_cast<std::uint64_t>(i);
    try {
      if (!rec.gt) throw Error(ErrorCode::SchemaError, "missing field 'gt'");
      if (rec.q.size() != s.chain.size()) {
        throw Error(ErrorCode::JointCountMismatch, "joint values do not match the chain");
      }
      ps = predict(ps, cfg.motion, cfg.filter.seed, step, cfg.threads);

      RansacParams rp = oc.ransac;
      rp.seed = CounterRng::derive(oc.ransac.seed, static_cast<std::uint64_t>(rec.t), 0, CounterRng::Stream::Ransac);
      const Evidence ev = prepare_evidence(kind, rec.frame, oc.extraction, rp);
      if (ev.skip) ++res.skipped_frames;
      ps = update(ps, ev, model, rec.q, oc.polar, oc.intensity, cfg.threads);

      if (effective_sample_size(ps) < resample_below) {
        ps = resample_systematic(ps, cfg.filter.seed, step);
        ++res.resample_count;
      }
      const LumpedErrorParams est = estimate(ps);
      res.estimates.push_back(est);
      const auto tip = tip_pixel(s, rec.q, est);
      // A tip behind the camera counts as a full-diagonal miss.
      const double err = tip ? (*tip - rec.gt->tip_px).norm() : s.camera.diagonal();
      res.estimated_tip_px.push_back(tip.value_or(Vec2(std::nan(""), std::nan(""))));
      errors_px.push_back(err);
    } catch (const Error& e) {
      throw Error(e.code(), "frame " + std::to_string(rec.t) + ": " + e.what(), e.line(), rec.t);
    }
  }
  res.metrics = summarize(std::move(errors_px), s.camera);
  return res;
}

std::vector<ModelRow> compare_models(std::span<const FrameRecord> dataset, const AppConfig& cfg,
                                     std::span<const ObservationModelKind> kinds) {
  std::vector<ModelRow> rows;
  for (auto kind : kinds) {
    ModelRow row;
    row.kind = kind;
    try {
      row.result = run_tracking(dataset, kind, cfg);
      row.ok = true;
    } catch (const Error& e) {
      row.ok = false;
      row.error = std::string(to_string(e.code())) + ": " + e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::ordered_json tracking_to_json(const TrackingResult& r, std::span<const FrameRecord> dataset) {
  nlohmann::ordered_json j;
  j["model"] = model_name(r.kind);
  j["mean_pct"] = r.metrics.mean_pct;
  j["std_pct"] = r.metrics.std_pct;
  j["final_accumulated_pct"] = r.metrics.accumulated_error_pct.empty() ? 0.0 : r.metrics.accumulated_error_pct.back();
  j["skipped_frames"] = r.skipped_frames;
  j["resample_count"] = r.resample_count;
  j["per_frame_error_px"] = r.metrics.per_frame_error_px;
  j["per_frame_error_pct"] = r.metrics.per_frame_error_pct;
  j["accumulated_error_pct"] = r.metrics.accumulated_error_pct;
  auto trace = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.estimates.size(); ++i) {
    nlohmann::ordered_json e;
    e["t"] = i < dataset.size() ? dataset[i].t : static_cast<long>(i);
    e["b"] = vec_json(r.estimates[i].b());
    e["w"] = vec_json(r.estimates[i].w());
    const Vec2& tip = r.estimated_tip_px[i];
    if (std::isfinite(tip.x())) {
      e["tip_px"] = {tip.x(), tip.y()};
    } else {
      e["tip_px"] = nullptr;
    }
    trace.push_back(e);
  }
  j["trace"] = trace;
  return j;
}

std::string compare_to_csv(std::span<const ModelRow> rows) {
  std::ostringstream out;
  out << "model,mean_pct,std_pct,final_accumulated_pct,skipped_frames\n";
  for (const auto& row : rows) {
    out << model_name(row.kind) << ',';
    if (row.ok) {
      const auto& m = row.result.metrics;
      out << fmt6(m.mean_pct) << ',' << fmt6(m.std_pct) << ','
          << fmt6(m.accumulated_error_pct.empty() ? 0.0 : m.accumulated_error_pct.back()) << ','
          << row.result.skipped_frames << '\n';
    } else {
      out << "failed,failed,failed,failed\n";
    }
  }
  return out.str();
}

nlohmann::ordered_json compare_to_json(std::span<const ModelRow> rows, std::span<const FrameRecord> dataset) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    if (row.ok) {
      auto j = tracking_to_json(row.result, dataset);
      j["status"] = "ok";
      out.push_back(j);
    } else {
      out.push_back({{"model", model_name(row.kind)}, {"status", "failed"}, {"error", row.error}});
    }
  }
  return out;
}

}  // namespace shafttrack
