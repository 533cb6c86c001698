// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
// The mask kernels use explicit mul/add (never fmadd) so they stay
// bit-identical to the scalar reference; only the reduction uses fmadd.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "shafttrack/kernels.hpp"

namespace shafttrack::kernels {

namespace {

inline std::size_t store_mask(__m256d cmp, std::uint8_t* mask) {
  const int bits = _mm256_movemask_pd(cmp);
  mask[0] = static_cast<std::uint8_t>(bits & 1);
  mask[1] = static_cast<std::uint8_t>((bits >> 1) & 1);
  mask[2] = static_cast<std::uint8_t>((bits >> 2) & 1);
  mask[3] = static_cast<std::uint8_t>((bits >> 3) & 1);
  return static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(bits)));
}

double min_sq_residual_sum(const double* x, const double* y, std::size_t n, LineCoeffs l1, LineCoeffs l2) {
  const __m256d c1 = _mm256_set1_pd(l1.c), s1 = _mm256_set1_pd(l1.s), p1 = _mm256_set1_pd(l1.rho);
  const __m256d c2 = _mm256_set1_pd(l2.c), s2 = _mm256_set1_pd(l2.s), p2 = _mm256_set1_pd(l2.rho);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d xa = _mm256_loadu_pd(x + i), ya = _mm256_loadu_pd(y + i);
    const __m256d xb = _mm256_loadu_pd(x + i + 4), yb = _mm256_loadu_pd(y + i + 4);
    const __m256d ra1 = _mm256_sub_pd(_mm256_fmadd_pd(c1, xa, _mm256_mul_pd(s1, ya)), p1);
    const __m256d ra2 = _mm256_sub_pd(_mm256_fmadd_pd(c2, xa, _mm256_mul_pd(s2, ya)), p2);
    const __m256d rb1 = _mm256_sub_pd(_mm256_fmadd_pd(c1, xb, _mm256_mul_pd(s1, yb)), p1);
    const __m256d rb2 = _mm256_sub_pd(_mm256_fmadd_pd(c2, xb, _mm256_mul_pd(s2, yb)), p2);
    acc0 = _mm256_add_pd(acc0, _mm256_min_pd(_mm256_mul_pd(ra1, ra1), _mm256_mul_pd(ra2, ra2)));
    acc1 = _mm256_add_pd(acc1, _mm256_min_pd(_mm256_mul_pd(rb1, rb1), _mm256_mul_pd(rb2, rb2)));
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d xa = _mm256_loadu_pd(x + i), ya = _mm256_loadu_pd(y + i);
    const __m256d ra1 = _mm256_sub_pd(_mm256_fmadd_pd(c1, xa, _mm256_mul_pd(s1, ya)), p1);
    const __m256d ra2 = _mm256_sub_pd(_mm256_fmadd_pd(c2, xa, _mm256_mul_pd(s2, ya)), p2);
    acc0 = _mm256_add_pd(acc0, _mm256_min_pd(_mm256_mul_pd(ra1, ra1), _mm256_mul_pd(ra2, ra2)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) {
    const double r1 = l1.c * x[i] + l1.s * y[i] - l1.rho;
    const double r2 = l2.c * x[i] + l2.s * y[i] - l2.rho;
    sum += std::min(r1 * r1, r2 * r2);
  }
  return sum;
}

std::size_t line_inlier_mask(const double* x, const double* y, std::size_t n, LineCoeffs l, double threshold,
                             std::uint8_t* mask) {
  const __m256d c = _mm256_set1_pd(l.c), s = _mm256_set1_pd(l.s), rho = _mm256_set1_pd(l.rho);
  const __m256d thr = _mm256_set1_pd(threshold);
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_sub_pd(
        _mm256_add_pd(_mm256_mul_pd(c, _mm256_loadu_pd(x + i)), _mm256_mul_pd(s, _mm256_loadu_pd(y + i))), rho);
    count += store_mask(_mm256_cmp_pd(_mm256_andnot_pd(sign, r), thr, _CMP_LE_OQ), mask + i);
  }
  for (; i < n; ++i) {
    const double r = l.c * x[i] + l.s * y[i] - l.rho;
    const bool in = std::abs(r) <= threshold;
    mask[i] = in;
    count += in;
  }
  return count;
}

std::size_t radius_mask(const double* x, const double* y, const double* w, std::size_t n, double ex, double ey,
                        double radius_sq, double beta, std::uint8_t* mask) {
  const __m256d vx = _mm256_set1_pd(ex), vy = _mm256_set1_pd(ey);
  const __m256d r2 = _mm256_set1_pd(radius_sq), b = _mm256_set1_pd(beta);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + i), vx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y + i), vy);
    const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    const __m256d in = _mm256_and_pd(_mm256_cmp_pd(d2, r2, _CMP_LE_OQ),
                                     _mm256_cmp_pd(_mm256_loadu_pd(w + i), b, _CMP_GE_OQ));
    count += store_mask(in, mask + i);
  }
  for (; i < n; ++i) {
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
  const __m256d vax = _mm256_set1_pd(ax), vay = _mm256_set1_pd(ay);
  const __m256d vux = _mm256_set1_pd(ux), vuy = _mm256_set1_pd(uy), vlen = _mm256_set1_pd(len_sq);
  const __m256d zero = _mm256_setzero_pd(), one = _mm256_set1_pd(1.0);
  const __m256d r2 = _mm256_set1_pd(radius_sq), b = _mm256_set1_pd(beta);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d px = _mm256_sub_pd(_mm256_loadu_pd(x + i), vax);
    const __m256d py = _mm256_sub_pd(_mm256_loadu_pd(y + i), vay);
    const __m256d proj = _mm256_div_pd(_mm256_add_pd(_mm256_mul_pd(px, vux), _mm256_mul_pd(py, vuy)), vlen);
    // min/max operand order matches std::min(1.0, v) / std::max(0.0, v) for finite v.
    const __m256d t = _mm256_max_pd(zero, _mm256_min_pd(one, proj));
    const __m256d dx = _mm256_sub_pd(px, _mm256_mul_pd(t, vux));
    const __m256d dy = _mm256_sub_pd(py, _mm256_mul_pd(t, vuy));
    const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    const __m256d in = _mm256_and_pd(_mm256_cmp_pd(d2, r2, _CMP_LE_OQ),
                                     _mm256_cmp_pd(_mm256_loadu_pd(w + i), b, _CMP_GE_OQ));
    count += store_mask(in, mask + i);
  }
  for (; i < n; ++i) {
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

const KernelTable& avx2_kernels() {
  static const KernelTable table{min_sq_residual_sum, line_inlier_mask, radius_mask, segment_mask};
  return table;
}

}  // namespace shafttrack::kernels
