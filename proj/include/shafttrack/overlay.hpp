#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shafttrack/cylinder.hpp"
#include "shafttrack/detection.hpp"

namespace shafttrack {

struct OverlayInput {
  const DetectionFrame* frame = nullptr;
  std::optional<LinePair> projected;  ///< drawn solid, clipped to the image
  std::vector<PointSet> point_sets;   ///< evidence pixels, one colour per set
  std::optional<Vec2> estimate_tip;   ///< cross marker
  std::optional<Vec2> gt_tip;         ///< ring marker
};

/// The part of `l` inside [0, width] x [0, height], or nullopt when the line misses it.
std::optional<Segment> clip_line_to_image(const PolarLine& l, int width, int height);

/// SVG document; the same input always yields the same bytes.
std::string overlay_svg(const OverlayInput& in);

/// Writes overlay_svg(in) to `path`. Throws IoError.
void render_overlay(const OverlayInput& in, const std::string& path);

}  // namespace shafttrack
