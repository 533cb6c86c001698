#pragma once
// Shared generators for randomized tests.
#include <random>

#include "shafttrack/cylinder.hpp"

namespace shafttrack::testing {

/// A tool-sized cylinder in front of the camera, outside it, and not nearly
/// parallel to the optical axis.
inline CylinderSpec random_visible_cylinder(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> xy(-0.04, 0.04), z(0.06, 0.25), rad(0.002, 0.008);
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    CylinderSpec c;
    c.p0 = Vec3(xy(rng), xy(rng), z(rng));
    c.d = Vec3(n(rng), n(rng), n(rng)).normalized();
    c.r = rad(rng);
    if (std::abs(c.d.z()) > 0.8) continue;
    // move p0 to the point nearest the camera so the sampled span stays in front
    c.p0 -= c.p0.dot(c.d) * c.d;
    if (c.p0.z() < 0.05) continue;
    return c;
  }
}

}  // namespace shafttrack::testing
