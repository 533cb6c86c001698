#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "shafttrack/config.hpp"
#include "shafttrack/dataset.hpp"

namespace shafttrack {

struct MetricsReport {
  std::vector<double> per_frame_error_px;
  std::vector<double> per_frame_error_pct;
  std::vector<double> accumulated_error_pct;
  double mean_pct = 0.0;
  double std_pct = 0.0;  ///< population standard deviation
};

/// 100 * err / image diagonal.
double tip_error_percent(double err_px, const CameraIntrinsics& k);

/// Running mean: element k = mean(pct[0..k]). Throws EmptyInput.
std::vector<double> accumulated_error(std::span<const double> per_frame_pct);

MetricsReport summarize(std::vector<double> per_frame_error_px, const CameraIntrinsics& k);

ShaftModel shaft_model(const ScenarioConfig& s);

/// Tip pixel under a given lumped error, or nullopt when the tip is behind the camera.
std::optional<Vec2> tip_pixel(const ScenarioConfig& s, std::span<const double> q, const LumpedErrorParams& params);

std::vector<double> joint_values(const ScenarioConfig& s, long frame);

/// Ground-truth frame synthesis for one time step. Throws ProjectionInvalid
/// (with the frame index) when the shaft or tip cannot be projected.
FrameRecord synthesize_frame(const ScenarioConfig& s, long t, const LumpedErrorParams& gt);

/// Full synthetic dataset; deterministic given the scenario seed.
std::vector<FrameRecord> generate_scenario(const ScenarioConfig& s);

struct TrackingResult {
  ObservationModelKind kind = ObservationModelKind::LineIntensities;
  MetricsReport metrics;
  std::vector<LumpedErrorParams> estimates;
  std::vector<Vec2> estimated_tip_px;
  int skipped_frames = 0;
  int resample_count = 0;
};

/// predict -> update -> resample when ESS < fraction * n -> estimate, per
/// frame. Errors are rethrown with the frame index attached.
TrackingResult run_tracking(std::span<const FrameRecord> dataset, ObservationModelKind kind, const AppConfig& cfg);

struct ModelRow {
  ObservationModelKind kind = ObservationModelKind::LineIntensities;
  bool ok = false;
  std::string error;
  TrackingResult result;
};

/// One tracking run per model with identical seeds; a failing model yields a
/// row with ok = false instead of aborting.
std::vector<ModelRow> compare_models(std::span<const FrameRecord> dataset, const AppConfig& cfg,
                                     std::span<const ObservationModelKind> kinds);

nlohmann::ordered_json tracking_to_json(const TrackingResult& r, std::span<const FrameRecord> dataset);
std::string compare_to_csv(std::span<const ModelRow> rows);
nlohmann::ordered_json compare_to_json(std::span<const ModelRow> rows, std::span<const FrameRecord> dataset);

}  // namespace shafttrack
