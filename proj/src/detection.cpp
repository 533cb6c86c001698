#include "shafttrack/detection.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

#include "shafttrack/kernels.hpp"

namespace shafttrack {

namespace {

std::int64_t cell_key(double x, double y) {
  return static_cast<std::int64_t>(std::floor(y)) * 1'000'000'007LL + static_cast<std::int64_t>(std::floor(x));
}

PointSet gather(const Heatmap& h, const std::vector<std::uint8_t>& mask, std::size_t count) {
  PointSet out;
  out.x.reserve(count);
  out.y.reserve(count);
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (mask[i]) {
      out.x.push_back(h.x[i]);
      out.y.push_back(h.y[i]);
    }
  }
  return out;
}

kernels::LineCoeffs coeffs(const PolarLine& l) {
  return {std::cos(l.theta), std::sin(l.theta), l.rho};
}

}  // namespace

void PointSet::append(const PointSet& other) {
  x.insert(x.end(), other.x.begin(), other.x.end());
  y.insert(y.end(), other.y.begin(), other.y.end());
}

std::vector<Vec2> PointSet::points() const {
  std::vector<Vec2> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.emplace_back(x[i], y[i]);
  return out;
}

void DetectionFrame::validate() const {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidArgument, "frame: image size must be positive");
  if (segments.size() > 2) throw Error(ErrorCode::InvalidArgument, "frame: at most two segments");
  auto in_bounds = [&](double x, double y) { return x >= 0.0 && x < width && y >= 0.0 && y < height; };
  for (const auto& s : segments) {
    if (!in_bounds(s.a.x(), s.a.y()) || !in_bounds(s.b.x(), s.b.y())) {
      throw Error(ErrorCode::InvalidArgument, "frame: segment endpoint outside the image");
    }
  }
  std::unordered_set<std::int64_t> cells;
  for (std::size_t i = 0; i < heatmap.size(); ++i) {
    if (!in_bounds(heatmap.x[i], heatmap.y[i])) {
      throw Error(ErrorCode::InvalidArgument, "frame: heatmap pixel outside the image");
    }
    if (!(heatmap.intensity[i] >= 0.0 && heatmap.intensity[i] <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "frame: heatmap intensity outside [0, 1]");
    }
    if (!cells.insert(cell_key(heatmap.x[i], heatmap.y[i])).second) {
      throw Error(ErrorCode::InvalidArgument, "frame: duplicate heatmap pixel");
    }
  }
}

void ExtractionParams::validate() const {
  if (!(alpha_e >= 0.0) || !(alpha_l >= 0.0) || !(beta >= 0.0 && beta <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "extraction params: need alpha >= 0 and 0 <= beta <= 1");
  }
}

void RansacParams::validate() const {
  if (passes < 1 || min_samples < 2 || !(residual_threshold > 0.0) || max_trials < 1) {
    throw Error(ErrorCode::InvalidArgument,
                "ransac params: need passes >= 1, min_samples >= 2, threshold > 0, max_trials >= 1");
  }
}

void SyntheticDetectorParams::validate() const {
  if (!(pixel_noise_sigma >= 0.0) || outlier_count < 0 || !(endpoint_dropout_prob >= 0.0 && endpoint_dropout_prob <= 1.0) ||
      !(segment_extent > 0.0 && segment_extent <= 1.0) || !(heatmap_radius > 0.0) ||
      !(outlier_min_intensity >= 0.0 && outlier_min_intensity <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "synthetic detector params out of range");
  }
}

PointSet endpoint_point_set(const DetectionFrame& frame, const Vec2& e, const ExtractionParams& p) {
  const Heatmap& h = frame.heatmap;
  std::vector<std::uint8_t> mask(h.size());
  const std::size_t n = kernels::active().radius_mask(h.x.data(), h.y.data(), h.intensity.data(), h.size(), e.x(),
                                                      e.y(), p.alpha_e * p.alpha_e, p.beta, mask.data());
  return gather(h, mask, n);
}

PointSet line_point_set(const DetectionFrame& frame, const Vec2& e_a, const Vec2& e_b, const ExtractionParams& p) {
  if (e_a == e_b) throw Error(ErrorCode::DegenerateSegment, "line_point_set: segment endpoints coincide");
  const Heatmap& h = frame.heatmap;
  std::vector<std::uint8_t> mask(h.size());
  const std::size_t n =
      kernels::active().segment_mask(h.x.data(), h.y.data(), h.intensity.data(), h.size(), e_a.x(), e_a.y(), e_b.x(),
                                     e_b.y(), p.alpha_l * p.alpha_l, p.beta, mask.data());
  return gather(h, mask, n);
}

PointSet thresholded_heatmap(const DetectionFrame& frame, double beta) {
  PointSet out;
  const Heatmap& h = frame.heatmap;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h.intensity[i] >= beta) out.push_back({h.x[i], h.y[i]});
  }
  return out;
}

std::vector<RansacLine> sequential_ransac_two_lines(const PointSet& points, const RansacParams& rp) {
  rp.validate();
  const auto min_samples = static_cast<std::size_t>(rp.min_samples);
  if (points.size() < min_samples) {
    throw Error(ErrorCode::InsufficientPoints, "sequential_ransac_two_lines: fewer points than min_samples");
  }
  std::mt19937_64 rng(rp.seed);
  const auto& kt = kernels::active();

  PointSet remaining = points;
  std::vector<RansacLine> found;
  const int max_lines = std::min(rp.passes, 2);
  std::vector<std::uint8_t> mask;
  std::vector<std::uint8_t> best_mask;
  std::vector<std::size_t> sample;
  std::vector<Vec2> sample_pts;

  for (int pass = 0; pass < max_lines; ++pass) {
    const std::size_t n = remaining.size();
    if (n < min_samples) break;
    mask.assign(n, 0);
    best_mask.assign(n, 0);
    std::size_t best_count = 0;
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);

    for (int trial = 0; trial < rp.max_trials; ++trial) {
      sample.clear();
      while (sample.size() < min_samples) {
        const std::size_t idx = pick(rng);
        if (std::find(sample.begin(), sample.end(), idx) == sample.end()) sample.push_back(idx);
      }
      sample_pts.clear();
      for (std::size_t idx : sample) sample_pts.push_back(remaining[idx]);
      PolarLine hyp;
      try {
        hyp = fit_line_tls(sample_pts);
      } catch (const Error&) {
        continue;  // coincident sample
      }
      const std::size_t count = kt.line_inlier_mask(remaining.x.data(), remaining.y.data(), n, coeffs(hyp),
                                                    rp.residual_threshold, mask.data());
      if (count > best_count) {
        best_count = count;
        best_mask.swap(mask);
      }
    }

    if (best_count < min_samples) break;
    RansacLine line;
    PointSet rest;
    for (std::size_t i = 0; i < n; ++i) {
      if (best_mask[i]) {
        line.inliers.push_back(remaining[i]);
      } else {
        rest.push_back(remaining[i]);
      }
    }
    try {
      line.line = fit_line_tls(line.inliers.points());
    } catch (const Error&) {
      break;
    }
    found.push_back(std::move(line));
    remaining = std::move(rest);
  }

  if (found.empty()) {
    throw Error(ErrorCode::InsufficientPoints, "sequential_ransac_two_lines: no consensus line");
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const RansacLine& a, const RansacLine& b) { return a.inliers.size() > b.inliers.size(); });
  return found;
}

DetectionFrame synthesize_detection(const LinePair& gt_lines, const std::array<Segment, 2>& visible_span,
                                    const SyntheticDetectorParams& sp, int width, int height, std::uint64_t seed) {
  sp.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  DetectionFrame frame;
  frame.width = width;
  frame.height = height;
  std::unordered_set<std::int64_t> cells;

  auto clamp_to_image = [&](Vec2 p) {
    p.x() = std::clamp(p.x(), 0.0, std::nextafter(static_cast<double>(width), 0.0));
    p.y() = std::clamp(p.y(), 0.0, std::nextafter(static_cast<double>(height), 0.0));
    return p;
  };
  auto in_image = [&](double x, double y) { return x >= 0.0 && x < width && y >= 0.0 && y < height; };
  const double two_r2 = 2.0 * sp.heatmap_radius * sp.heatmap_radius;

  for (std::size_t k = 0; k < 2; ++k) {
    const Segment& span = visible_span[k];
    const Vec2 centre = 0.5 * (span.a + span.b);
    const Vec2 half = 0.5 * sp.segment_extent * (span.b - span.a);
    const Vec2 sa = centre - half;
    const Vec2 sb = centre + half;
    const double len = (sb - sa).norm();

    // Fixed draw order per edge keeps the stream aligned whatever the outcome.
    const Vec2 ea = sa + sp.pixel_noise_sigma * Vec2(noise(rng), noise(rng));
    const Vec2 eb = sb + sp.pixel_noise_sigma * Vec2(noise(rng), noise(rng));
    const bool dropped = unit(rng) < sp.endpoint_dropout_prob;
    if (!(len > 0.0)) continue;
    if (!dropped) frame.segments.push_back({clamp_to_image(ea), clamp_to_image(eb)});

    const Vec2 dir = (sb - sa) / len;
    const Vec2 normal(std::cos(gt_lines[k].theta), std::sin(gt_lines[k].theta));
    const auto samples = static_cast<std::size_t>(std::floor(len)) + 1;
    for (std::size_t i = 0; i < samples; ++i) {
      const double offset = sp.pixel_noise_sigma * noise(rng);
      const Vec2 p = sa + static_cast<double>(i) * dir + offset * normal;
      if (!in_image(p.x(), p.y())) continue;
      if (!cells.insert(cell_key(p.x(), p.y())).second) continue;
      frame.heatmap.push_back(p.x(), p.y(), std::exp(-offset * offset / two_r2));
    }
  }

  std::uniform_real_distribution<double> ux(0.0, static_cast<double>(width));
  std::uniform_real_distribution<double> uy(0.0, static_cast<double>(height));
  std::uniform_real_distribution<double> uw(sp.outlier_min_intensity, 1.0);
  for (int i = 0; i < sp.outlier_count; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    const double w = uw(rng);
    if (!in_image(x, y)) continue;
    if (!cells.insert(cell_key(x, y)).second) continue;
    frame.heatmap.push_back(x, y, w);
  }
  return frame;
}

}  // namespace shafttrack
