#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <regex>
#include <sstream>

#include "shafttrack/error.hpp"
#include "shafttrack/overlay.hpp"

using namespace shafttrack;

namespace {

DetectionFrame empty_frame() {
  DetectionFrame f;
  f.width = 1920;
  f.height = 1080;
  return f;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

// Pulls the "projected" group out and parses its <line> endpoints.
std::vector<Segment> projected_lines(const std::string& svg) {
  const auto begin = svg.find("<g id=\"projected\"");
  const auto end = svg.find("</g>", begin);
  const std::string group = svg.substr(begin, end - begin);
  static const std::regex line_re(R"re(x1="([-0-9.]+)" y1="([-0-9.]+)" x2="([-0-9.]+)" y2="([-0-9.]+)")re");
  std::vector<Segment> out;
  for (std::sregex_iterator it(group.begin(), group.end(), line_re), last; it != last; ++it) {
    out.push_back({Vec2(std::stod((*it)[1]), std::stod((*it)[2])), Vec2(std::stod((*it)[3]), std::stod((*it)[4]))});
  }
  return out;
}

}  // namespace

TEST_CASE("empty frame draws only background and markers") {
  const DetectionFrame f = empty_frame();
  OverlayInput in;
  in.frame = &f;
  in.estimate_tip = Vec2(100.0, 200.0);
  in.gt_tip = Vec2(110.0, 190.0);
  const std::string svg = overlay_svg(in);
  CHECK(count(svg, "<circle") == 1);  // the ground-truth ring
  CHECK(count(svg, "<line") == 0);
  CHECK(count(svg, "id=\"gt_tip\"") == 1);
  CHECK(count(svg, "id=\"estimate_tip\"") == 1);
  CHECK(svg.find("width=\"1920\" height=\"1080\"") != std::string::npos);

  OverlayInput bare;
  bare.frame = &f;
  const std::string plain = overlay_svg(bare);
  CHECK(count(plain, "<circle") == 0);
  CHECK(count(plain, "<path") == 0);
}

TEST_CASE("same input yields the same bytes") {
  DetectionFrame f = empty_frame();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(0.0, 1919.0), uy(0.0, 1079.0), ui(0.0, 1.0);
  for (int i = 0; i < 200; ++i) f.heatmap.push_back(std::floor(ux(rng)), std::floor(uy(rng)), ui(rng));
  f.segments.push_back({Vec2(10, 10), Vec2(500, 700)});
  OverlayInput in;
  in.frame = &f;
  in.projected = LinePair{PolarLine{0.4, 300.0}, PolarLine{0.5, 420.0}};
  in.point_sets.resize(2);
  in.point_sets[0].push_back(Vec2(12.5, 13.25));
  in.estimate_tip = Vec2(321.0, 654.0);
  const std::string a = overlay_svg(in);
  CHECK(a == overlay_svg(in));
  CHECK(count(a, "<circle") == 201);
  CHECK(count(a, "<line") == 3);
}

TEST_CASE("projected lines are drawn where the polar equation holds") {
  const DetectionFrame f = empty_frame();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ut(0.0, std::numbers::pi), ur(-500.0, 2200.0);
  int drawn = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const PolarLine l{ut(rng), ur(rng)};
    OverlayInput in;
    in.frame = &f;
    in.projected = LinePair{l, l};
    const auto segs = projected_lines(overlay_svg(in));
    const auto clipped = clip_line_to_image(l, f.width, f.height);
    CHECK(segs.size() == (clipped ? 2u : 0u));
    for (const auto& s : segs) {
      ++drawn;
      for (const Vec2& p : {s.a, s.b}) {
        CHECK(std::abs(p.x() * std::cos(l.theta) + p.y() * std::sin(l.theta) - l.rho) < 0.5);
        CHECK(p.x() >= -1e-3);
        CHECK(p.x() <= f.width + 1e-3);
        CHECK(p.y() >= -1e-3);
        CHECK(p.y() <= f.height + 1e-3);
      }
    }
  }
  CHECK(drawn > 100);
}

TEST_CASE("clipping") {
  SUBCASE("vertical line spans the full height") {
    const auto s = clip_line_to_image(PolarLine{0.0, 50.0}, 100, 80);
    REQUIRE(s.has_value());
    CHECK(s->a.x() == doctest::Approx(50.0));
    CHECK(s->b.x() == doctest::Approx(50.0));
    CHECK(std::abs(s->a.y() - s->b.y()) == doctest::Approx(80.0));
  }
  SUBCASE("line outside the image") { CHECK_FALSE(clip_line_to_image(PolarLine{0.0, -5.0}, 100, 80).has_value()); }
  SUBCASE("diagonal through a corner pair") {
    const double th = std::atan2(100.0, 80.0);  // normal to the anti-diagonal
    const auto s = clip_line_to_image(PolarLine{th, 100.0 * std::cos(th)}, 100, 80);
    REQUIRE(s.has_value());
    CHECK((s->a - s->b).norm() == doctest::Approx(std::hypot(100.0, 80.0)));
  }
}

TEST_CASE("render_overlay writes the file or raises IoError") {
  const DetectionFrame f = empty_frame();
  OverlayInput in;
  in.frame = &f;
  const std::string path = "test_overlay_out.svg";
  render_overlay(in, path);
  std::ifstream file(path, std::ios::binary);
  std::stringstream buf;
  buf << file.rdbuf();
  CHECK(buf.str() == overlay_svg(in));
  std::remove(path.c_str());

  try {
    render_overlay(in, "/nonexistent-dir/x/out.svg");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
  OverlayInput none;
  CHECK_THROWS_AS(overlay_svg(none), Error);
}
