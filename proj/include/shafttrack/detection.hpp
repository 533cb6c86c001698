#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "shafttrack/cylinder.hpp"
#include "shafttrack/geometry.hpp"

namespace shafttrack {

/// Pixel coordinates in structure-of-arrays layout (kernel-friendly).
struct PointSet {
  std::vector<double> x;
  std::vector<double> y;

  std::size_t size() const { return x.size(); }
  bool empty() const { return x.empty(); }
  void push_back(const Vec2& p) {
    x.push_back(p.x());
    y.push_back(p.y());
  }
  Vec2 operator[](std::size_t i) const { return {x[i], y[i]}; }
  void append(const PointSet& other);
  std::vector<Vec2> points() const;
};

/// Sparse line heatmap: sub-pixel positions with intensity in [0, 1], at most
/// one entry per integer pixel cell.
struct Heatmap {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> intensity;

  std::size_t size() const { return x.size(); }
  bool empty() const { return x.empty(); }
  void push_back(double px, double py, double w) {
    x.push_back(px);
    y.push_back(py);
    intensity.push_back(w);
  }
};

struct Segment {
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
};

/// One frame of detector output: up to two shaft segments plus the heatmap.
struct DetectionFrame {
  std::vector<Segment> segments;
  Heatmap heatmap;
  int width = 0;
  int height = 0;

  /// Throws InvalidArgument on out-of-bounds pixels, bad intensities,
  /// duplicate cells or more than two segments.
  void validate() const;
};

struct ExtractionParams {
  double alpha_e = 10.0;  ///< endpoint search radius (px)
  double alpha_l = 10.0;  ///< line search radius (px)
  double beta = 0.90;     ///< heatmap threshold

  void validate() const;
};

struct RansacParams {
  int passes = 5;
  int min_samples = 3;
  double residual_threshold = 0.75;  ///< px
  int max_trials = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticDetectorParams {
  double pixel_noise_sigma = 1.0;
  int outlier_count = 5;
  double endpoint_dropout_prob = 0.1;
  double segment_extent = 0.9;  ///< fraction of the visible span covered by segment + heatmap
  double heatmap_radius = 3.0;  ///< px
  double outlier_min_intensity = 0.90;

  void validate() const;
};

/// { p in heatmap : |p - e| <= alpha_e and H(p) >= beta }
PointSet endpoint_point_set(const DetectionFrame& frame, const Vec2& e, const ExtractionParams& p);

/// { p in heatmap : dist(p, segment [e_a, e_b]) <= alpha_l and H(p) >= beta }.
/// Throws DegenerateSegment when e_a == e_b.
PointSet line_point_set(const DetectionFrame& frame, const Vec2& e_a, const Vec2& e_b, const ExtractionParams& p);

/// All heatmap entries with H(p) >= beta.
PointSet thresholded_heatmap(const DetectionFrame& frame, double beta);

struct RansacLine {
  PolarLine line;
  PointSet inliers;
};

/// Sequential RANSAC for at most two lines. Each pass samples `min_samples`
/// points per trial, keeps the hypothesis with the most inliers, refits it by
/// total least squares and removes its inliers. Throws InsufficientPoints when
/// the first pass cannot run; a failed second pass just yields one line.
std::vector<RansacLine> sequential_ransac_two_lines(const PointSet& points, const RansacParams& rp);

/// Emulated detector output for the two ground-truth edge lines. `visible_span`
/// holds, per edge, the two ends of the visible shaft on that edge (px).
DetectionFrame synthesize_detection(const LinePair& gt_lines, const std::array<Segment, 2>& visible_span,
                                    const SyntheticDetectorParams& sp, int width, int height, std::uint64_t seed);

}  // namespace shafttrack
