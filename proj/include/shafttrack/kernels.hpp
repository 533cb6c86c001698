#pragma once

// Data-parallel inner loops over structure-of-arrays point sets. Every kernel
// has a scalar reference and, on x86-64, an AVX2 variant picked at runtime.
// Mask kernels are bit-exact across variants (no FMA contraction, identical
// operation order); reductions agree up to summation order and rounding.

#include <cstddef>
#include <cstdint>

namespace shafttrack::kernels {

/// cos(theta) x + sin(theta) y - rho
struct LineCoeffs {
  double c;
  double s;
  double rho;
};

struct KernelTable {
  /// sum_i min(r1(p_i)^2, r2(p_i)^2)
  double (*min_sq_residual_sum)(const double* x, const double* y, std::size_t n, LineCoeffs l1, LineCoeffs l2);
  /// mask[i] = |r(p_i)| <= threshold; returns the number of set entries
  std::size_t (*line_inlier_mask)(const double* x, const double* y, std::size_t n, LineCoeffs l, double threshold,
                                  std::uint8_t* mask);
  /// mask[i] = |p_i - e|^2 <= radius_sq && w_i >= beta
  std::size_t (*radius_mask)(const double* x, const double* y, const double* w, std::size_t n, double ex, double ey,
                             double radius_sq, double beta, std::uint8_t* mask);
  /// mask[i] = dist(p_i, segment ab)^2 <= radius_sq && w_i >= beta
  std::size_t (*segment_mask)(const double* x, const double* y, const double* w, std::size_t n, double ax, double ay,
                              double bx, double by, double radius_sq, double beta, std::uint8_t* mask);
};

enum class Isa { Scalar, Avx2 };

const char* to_string(Isa isa);

const KernelTable& scalar_table();
/// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_table();

bool isa_available(Isa isa);

/// Best available ISA unless overridden by force_isa() or SHAFTTRACK_SIMD=scalar|avx2.
Isa active_isa();
/// Throws shafttrack::Error(InvalidArgument) if the ISA is unavailable.
void force_isa(Isa isa);

const KernelTable& active();

}  // namespace shafttrack::kernels
