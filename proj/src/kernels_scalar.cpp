#include <algorithm>
#include <cmath>

#include "shafttrack/kernels.hpp"

namespace shafttrack::kernels {

namespace {

double min_sq_residual_sum(const double* x, const double* y, std::size_t n, LineCoeffs l1, LineCoeffs l2) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r1 = l1.c * x[i] + l1.s * y[i] - l1.rho;
    const double r2 = l2.c * x[i] + l2.s * y[i] - l2.rho;
    sum += std::min(r1 * r1, r2 * r2);
  }
  return sum;
}

std::size_t line_inlier_mask(const double* x, const double* y, std::size_t n, LineCoeffs l, double threshold,
                             std::uint8_t* mask) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = l.c * x[i] + l.s * y[i] - l.rho;
    const bool in = std::abs(r) <= threshold;
    mask[i] = in;
    count += in;
  }
  return count;
}

std::size_t radius_mask(const double* x, const double* y, const double* w, std::size_t n, double ex, double ey,
                        double radius_sq, double beta, std::uint8_t* mask) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - ex;
    const double dy = y[i] - ey;
    const bool in = (dx * dx + dy * dy <= radius_sq) && (w[i] >= beta);
    mask[i] = in;
    count += in;
  }
  return count;
}

std::size_t segment_mask(const double* x, const double* y, const double* w, std::size_t n, double ax, double ay,
                         double bx, double by, double radius_sq, double beta, std::uint8_t* mask) {
  const double ux = bx - ax;
  const double uy = by - ay;
  // A zero-length segment degenerates to a disc around a (projection t = 0).
  const double len_sq = (ux * ux + uy * uy) > 0.0 ? ux * ux + uy * uy : 1.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double px = x[i] - ax;
    const double py = y[i] - ay;
    const double t = std::max(0.0, std::min(1.0, (px * ux + py * uy) / len_sq));
    const double dx = px - t * ux;
    const double dy = py - t * uy;
    const bool in = (dx * dx + dy * dy <= radius_sq) && (w[i] >= beta);
    mask[i] = in;
    count += in;
  }
  return count;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{min_sq_residual_sum, line_inlier_mask, radius_mask, segment_mask};
  return table;
}

}  // namespace shafttrack::kernels
