#include "shafttrack/overlay.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "shafttrack/error.hpp"

namespace shafttrack {

namespace {

constexpr std::array<const char*, 4> kPointColours = {"#1f77b4", "#2ca02c", "#9467bd", "#8c564b"};

void appendf(std::string& out, const char* fmt, auto... args) {
  char buf[256];
  const int n = std::snprintf(buf, sizeof(buf), fmt, args...);
  out.append(buf, static_cast<std::size_t>(std::max(n, 0)));
}

}  // namespace

std::optional<Segment> clip_line_to_image(const PolarLine& l, int width, int height) {
  const double c = std::cos(l.theta), s = std::sin(l.theta);
  const double w = width, h = height;
  std::vector<Vec2> hits;
  const auto add = [&](double x, double y) {
    constexpr double eps = 1e-9;
    if (x < -eps || x > w + eps || y < -eps || y > h + eps) return;
    for (const auto& p : hits) {
      if ((p - Vec2(x, y)).norm() < 1e-7) return;
    }
    hits.emplace_back(x, y);
  };
  if (std::abs(s) > 1e-12) {
    add(0.0, l.rho / s);
    add(w, (l.rho - c * w) / s);
  }
  if (std::abs(c) > 1e-12) {
    add(l.rho / c, 0.0);
    add((l.rho - s * h) / c, h);
  }
  if (hits.size() < 2) return std::nullopt;
  return Segment{hits[0], hits[1]};
}

std::string overlay_svg(const OverlayInput& in) {
  if (in.frame == nullptr) throw Error(ErrorCode::InvalidArgument, "overlay: missing frame");
  const DetectionFrame& f = *in.frame;
  std::string out;
  appendf(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\">\n",
          f.width, f.height, f.width, f.height);
  appendf(out, "<rect x=\"0\" y=\"0\" width=\"%d\" height=\"%d\" fill=\"#101010\"/>\n", f.width, f.height);

  out += "<g id=\"heatmap\" fill=\"#d0d0d0\">\n";
  for (std::size_t i = 0; i < f.heatmap.size(); ++i) {
    appendf(out, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"0.8\" fill-opacity=\"%.3f\"/>\n", f.heatmap.x[i], f.heatmap.y[i],
            f.heatmap.intensity[i]);
  }
  out += "</g>\n";

  for (std::size_t k = 0; k < in.point_sets.size(); ++k) {
    appendf(out, "<g id=\"points%zu\" fill=\"%s\">\n", k, kPointColours[k % kPointColours.size()]);
    const PointSet& ps = in.point_sets[k];
    for (std::size_t i = 0; i < ps.size(); ++i) {
      appendf(out, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"1.5\"/>\n", ps.x[i], ps.y[i]);
    }
    out += "</g>\n";
  }

  out += "<g id=\"segments\" stroke=\"#ff7f0e\" stroke-width=\"2\" stroke-dasharray=\"6 4\">\n";
  for (const auto& seg : f.segments) {
    appendf(out, "<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\"/>\n", seg.a.x(), seg.a.y(), seg.b.x(),
            seg.b.y());
  }
  out += "</g>\n";

  out += "<g id=\"projected\" stroke=\"#ffd700\" stroke-width=\"1.5\">\n";
  if (in.projected) {
    for (const auto& l : *in.projected) {
      if (const auto seg = clip_line_to_image(l, f.width, f.height)) {
        appendf(out, "<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\"/>\n", seg->a.x(), seg->a.y(),
                seg->b.x(), seg->b.y());
      }
    }
  }
  out += "</g>\n";

  if (in.gt_tip) {
    appendf(out, "<circle id=\"gt_tip\" cx=\"%.3f\" cy=\"%.3f\" r=\"8\" fill=\"none\" stroke=\"#00ff00\" "
                 "stroke-width=\"2\"/>\n",
            in.gt_tip->x(), in.gt_tip->y());
  }
  if (in.estimate_tip) {
    const double x = in.estimate_tip->x(), y = in.estimate_tip->y();
    appendf(out, "<path id=\"estimate_tip\" d=\"M %.3f %.3f L %.3f %.3f M %.3f %.3f L %.3f %.3f\" "
                 "stroke=\"#ff0000\" stroke-width=\"2\"/>\n",
            x - 7, y - 7, x + 7, y + 7, x - 7, y + 7, x + 7, y - 7);
  }
  out += "</svg>\n";
  return out;
}

void render_overlay(const OverlayInput& in, const std::string& path) {
  const std::string svg = overlay_svg(in);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << svg;
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

}  // namespace shafttrack
