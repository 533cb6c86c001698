#include "shafttrack/observation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shafttrack/kernels.hpp"

namespace shafttrack {

namespace {

constexpr double kPi = std::numbers::pi;

double association_cost(const PolarLine& det, const PolarLine& proj, const PolarObsParams& pp) {
  double dtheta = det.theta - proj.theta;
  double proj_rho = proj.rho;
  // (theta, rho) and (theta +- pi, -rho) describe the same line.
  if (dtheta > kPi / 2) {
    dtheta -= kPi;
    proj_rho = -proj_rho;
  } else if (dtheta <= -kPi / 2) {
    dtheta += kPi;
    proj_rho = -proj_rho;
  }
  return pp.gamma_rho * std::abs(det.rho - proj_rho) + pp.gamma_theta * std::abs(dtheta);
}

double log_sum_exp_neg(double a, double b) {
  const double m = std::min(a, b);
  return -m + std::log(std::exp(m - a) + std::exp(m - b));
}

// Union of several heatmap selections, preserving heatmap order.
enum class SetShape { Endpoint, Line };

PointSet union_of_sets(const DetectionFrame& frame, SetShape shape, const ExtractionParams& ep) {
  const Heatmap& h = frame.heatmap;
  const auto& kt = kernels::active();
  std::vector<std::uint8_t> acc(h.size(), 0);
  std::vector<std::uint8_t> mask(h.size(), 0);
  for (const auto& seg : frame.segments) {
    if (shape == SetShape::Endpoint) {
      for (const Vec2& e : {seg.a, seg.b}) {
        kt.radius_mask(h.x.data(), h.y.data(), h.intensity.data(), h.size(), e.x(), e.y(), ep.alpha_e * ep.alpha_e,
                       ep.beta, mask.data());
        for (std::size_t i = 0; i < h.size(); ++i) acc[i] |= mask[i];
      }
    } else {
      if (seg.a == seg.b) continue;
      kt.segment_mask(h.x.data(), h.y.data(), h.intensity.data(), h.size(), seg.a.x(), seg.a.y(), seg.b.x(),
                      seg.b.y(), ep.alpha_l * ep.alpha_l, ep.beta, mask.data());
      for (std::size_t i = 0; i < h.size(); ++i) acc[i] |= mask[i];
    }
  }
  PointSet out;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (acc[i]) out.push_back({h.x[i], h.y[i]});
  }
  return out;
}

void fit_polar_lines(Evidence& ev, const RansacParams& rp) {
  if (ev.points.size() < static_cast<std::size_t>(rp.min_samples)) return;
  try {
    for (auto& l : sequential_ransac_two_lines(ev.points, rp)) ev.detected.push_back(l.line);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientPoints) throw;
  }
  ev.skip = ev.detected.empty();
}

}  // namespace

const char* model_name(ObservationModelKind kind) {
  switch (kind) {
    case ObservationModelKind::EndpointToPolar: return "endpoint_to_polar";
    case ObservationModelKind::EndpointIntensitiesToPolar: return "endpoint_intensities_to_polar";
    case ObservationModelKind::LineIntensitiesToPolar: return "line_intensities_to_polar";
    case ObservationModelKind::EndpointIntensities: return "endpoint_intensities";
    case ObservationModelKind::LineIntensities: return "line_intensities";
  }
  return "unknown";
}

ObservationModelKind model_from_name(std::string_view name) {
  for (auto kind : kAllModels) {
    if (name == model_name(kind)) return kind;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown observation model '" + std::string(name) + "'");
}

bool is_polar_model(ObservationModelKind kind) {
  return kind == ObservationModelKind::EndpointToPolar || kind == ObservationModelKind::EndpointIntensitiesToPolar ||
         kind == ObservationModelKind::LineIntensitiesToPolar;
}

void PolarObsParams::validate() const {
  if (!(gamma_rho > 0.0) || !(gamma_theta > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "polar observation params must be > 0");
  }
}

void IntensityObsParams::validate() const {
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "intensity sigma must be > 0");
}

double polar_log_likelihood(std::span<const PolarLine> detected, const LinePair& projected, const PolarObsParams& pp) {
  if (detected.empty()) throw Error(ErrorCode::NoDetections, "polar_log_likelihood: no detected lines");
  if (detected.size() == 1) {
    return -std::min(association_cost(detected[0], projected[0], pp),
                     association_cost(detected[0], projected[1], pp));
  }
  const double straight_0 = association_cost(detected[0], projected[0], pp);
  const double straight_1 = association_cost(detected[1], projected[1], pp);
  const double crossed_0 = association_cost(detected[0], projected[1], pp);
  const double crossed_1 = association_cost(detected[1], projected[0], pp);
  const double straight = straight_0 + straight_1;
  const double crossed = crossed_0 + crossed_1;
  if (crossed < straight) return log_sum_exp_neg(crossed_0, crossed_1);
  if (straight < crossed) return log_sum_exp_neg(straight_0, straight_1);
  // Equal totals: take the better score so swapping the detections cannot change the result.
  return std::max(log_sum_exp_neg(crossed_0, crossed_1), log_sum_exp_neg(straight_0, straight_1));
}

double intensity_log_likelihood(const PointSet& points, const LinePair& projected, const IntensityObsParams& ip) {
  if (points.empty()) throw Error(ErrorCode::NoPoints, "intensity_log_likelihood: empty point set");
  const kernels::LineCoeffs l1{std::cos(projected[0].theta), std::sin(projected[0].theta), projected[0].rho};
  const kernels::LineCoeffs l2{std::cos(projected[1].theta), std::sin(projected[1].theta), projected[1].rho};
  const double sum_sq = kernels::active().min_sq_residual_sum(points.x.data(), points.y.data(), points.size(), l1, l2);
  const double var = ip.sigma * ip.sigma;
  return -0.5 * std::log(2.0 * kPi * var) - sum_sq / (2.0 * var * static_cast<double>(points.size()));
}

Evidence prepare_evidence(ObservationModelKind kind, const DetectionFrame& frame, const ExtractionParams& ep,
                          const RansacParams& rp) {
  Evidence ev;
  ev.kind = kind;
  switch (kind) {
    case ObservationModelKind::EndpointToPolar:
      // With a zero search radius each endpoint is its own evidence; a pair
      // defines its line exactly.
      for (const auto& seg : frame.segments) {
        if (seg.a == seg.b) continue;
        const std::array<Vec2, 2> pts = {seg.a, seg.b};
        ev.detected.push_back(fit_line_tls(pts));
        ev.points.push_back(seg.a);
        ev.points.push_back(seg.b);
      }
      ev.skip = ev.detected.empty();
      break;
    case ObservationModelKind::EndpointIntensitiesToPolar:
      ev.points = union_of_sets(frame, SetShape::Endpoint, ep);
      fit_polar_lines(ev, rp);
      break;
    case ObservationModelKind::LineIntensitiesToPolar:
      ev.points = union_of_sets(frame, SetShape::Line, ep);
      fit_polar_lines(ev, rp);
      break;
    case ObservationModelKind::EndpointIntensities:
      ev.points = union_of_sets(frame, SetShape::Endpoint, ep);
      ev.skip = ev.points.empty();
      break;
    case ObservationModelKind::LineIntensities:
      ev.points = frame.segments.empty() ? thresholded_heatmap(frame, ep.beta)
                                         : union_of_sets(frame, SetShape::Line, ep);
      ev.skip = ev.points.empty();
      break;
  }
  return ev;
}

double score_evidence(const Evidence& ev, const LinePair& projected, const PolarObsParams& pp,
                      const IntensityObsParams& ip) {
  if (ev.skip) return 0.0;
  if (is_polar_model(ev.kind)) return polar_log_likelihood(ev.detected, projected, pp);
  return intensity_log_likelihood(ev.points, projected, ip);
}

double evaluate_model(ObservationModelKind kind, const DetectionFrame& frame, const LinePair& projected,
                      const ExtractionParams& ep, const RansacParams& rp, const PolarObsParams& pp,
                      const IntensityObsParams& ip) {
  return score_evidence(prepare_evidence(kind, frame, ep, rp), projected, pp, ip);
}

}  // namespace shafttrack
