#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shafttrack/cylinder.hpp"
#include "shafttrack/detection.hpp"

namespace shafttrack {

enum class ObservationModelKind {
  EndpointToPolar,             ///< baseline: lines through the detected endpoint pairs
  EndpointIntensitiesToPolar,  ///< RANSAC lines from heatmap pixels near endpoints
  LineIntensitiesToPolar,      ///< RANSAC lines from heatmap pixels along segments
  EndpointIntensities,         ///< pixel residuals of heatmap pixels near endpoints
  LineIntensities,             ///< pixel residuals of heatmap pixels along segments
};

inline constexpr std::array<ObservationModelKind, 5> kAllModels = {
    ObservationModelKind::EndpointToPolar, ObservationModelKind::EndpointIntensitiesToPolar,
    ObservationModelKind::LineIntensitiesToPolar, ObservationModelKind::EndpointIntensities,
    ObservationModelKind::LineIntensities};

const char* model_name(ObservationModelKind kind);
/// Accepts the snake_case names returned by model_name(). Throws InvalidArgument.
ObservationModelKind model_from_name(std::string_view name);
bool is_polar_model(ObservationModelKind kind);

struct PolarObsParams {
  double gamma_rho = 0.1;     ///< per pixel
  double gamma_theta = 20.0;  ///< per radian

  void validate() const;
};

struct IntensityObsParams {
  double sigma = 2.0;  ///< px

  void validate() const;
};

/// cos(theta) x + sin(theta) y - rho: signed perpendicular distance of p to l.
inline double residual_r(const Vec2& p, const PolarLine& l) { return polar_residual(l, p.x(), p.y()); }

/// log sum_i exp(-gamma_rho |d_rho_i| - gamma_theta |d_theta_i|) over the
/// cost-minimal association of detected to projected lines. Throws NoDetections.
double polar_log_likelihood(std::span<const PolarLine> detected, const LinePair& projected, const PolarObsParams& pp);

/// Mean over points of log N(r; 0, sigma^2), r the residual to the nearer
/// projected line. Throws NoPoints.
double intensity_log_likelihood(const PointSet& points, const LinePair& projected, const IntensityObsParams& ip);

/// Per-frame evidence for one model: everything that does not depend on the
/// particle (point-set extraction and RANSAC), computed once per frame.
struct Evidence {
  ObservationModelKind kind = ObservationModelKind::LineIntensities;
  bool skip = true;                     ///< no usable evidence: the update is a no-op
  std::vector<PolarLine> detected;      ///< polar models
  PointSet points;                      ///< pixel models; for polar models the RANSAC input
};

Evidence prepare_evidence(ObservationModelKind kind, const DetectionFrame& frame, const ExtractionParams& ep,
                          const RansacParams& rp);

/// Log-likelihood of the particle whose projected pixel-space lines are
/// `projected`; 0 when the evidence says skip.
double score_evidence(const Evidence& ev, const LinePair& projected, const PolarObsParams& pp,
                      const IntensityObsParams& ip);

double evaluate_model(ObservationModelKind kind, const DetectionFrame& frame, const LinePair& projected,
                      const ExtractionParams& ep, const RansacParams& rp, const PolarObsParams& pp,
                      const IntensityObsParams& ip);

}  // namespace shafttrack
