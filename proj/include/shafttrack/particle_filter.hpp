#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "shafttrack/cylinder.hpp"
#include "shafttrack/geometry.hpp"
#include "shafttrack/observation.hpp"

namespace shafttrack {

struct Particle {
  LumpedErrorParams params;
  double log_weight = 0.0;
};

using ParticleSet = std::vector<Particle>;

struct MotionParams {
  Mat6 cov = Mat6::Identity() * 1e-6;

  /// Throws InvalidArgument unless symmetric (1e-12) with eigenvalues >= -1e-12.
  void validate() const;
};

struct FilterConfig {
  int n_particles = 500;
  double resample_ess_fraction = 0.5;
  std::uint64_t seed = 0;
  LumpedErrorParams init_mean;
  Mat6 init_cov = Mat6::Identity() * 1e-4;

  void validate() const;
};

/// SplitMix64 stream keyed by (seed, step, particle, purpose). Each particle
/// draws from its own stream, so results do not depend on evaluation order.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  enum class Stream : std::uint64_t { Init = 1, Motion = 2, Resample = 3, Ransac = 4, Detector = 5, GroundTruth = 6 };

  CounterRng(std::uint64_t seed, std::uint64_t step, std::uint64_t index, Stream stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Stable 64-bit key for seeding other generators from the same tuple.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t step, std::uint64_t index, Stream stream);

 private:
  std::uint64_t state_;
};

/// L with L L^T = cov for a symmetric PSD matrix (negative eigenvalues clamped to 0).
Mat6 covariance_factor(const Mat6& cov);

ParticleSet initialize(const FilterConfig& cfg);

/// Adds an independent N(0, cov) draw to every particle's (b, w); weights are untouched.
ParticleSet predict(const ParticleSet& ps, const MotionParams& mp, std::uint64_t seed, std::uint64_t step,
                    int threads = 1);

/// Everything the update needs to turn a particle into projected pixel lines.
struct ShaftModel {
  const KinematicChain* chain = nullptr;
  CylinderSpec shaft;             ///< in the frame after joint `shaft_joint_index`
  std::size_t shaft_joint_index = 0;
  CameraIntrinsics camera;
};

/// Projected pixel-space shaft lines for one particle, or nullopt when the
/// projection preconditions fail.
std::optional<LinePair> project_shaft(const ShaftModel& model, std::span<const double> q,
                                      const LumpedErrorParams& params);

/// Adds the model log-likelihood to each particle, -inf for invalid
/// projections, then shifts so the max log-weight is 0. A skip evidence leaves
/// the set unchanged. Throws AllParticlesInvalid.
ParticleSet update(const ParticleSet& ps, const Evidence& evidence, const ShaftModel& model,
                   std::span<const double> q, const PolarObsParams& pp, const IntensityObsParams& ip,
                   int threads = 1);

/// Normalized linear weights. Throws DegenerateWeights when all are -inf.
std::vector<double> normalized_weights(const ParticleSet& ps);

double effective_sample_size(const ParticleSet& ps);

/// Low-variance resampling with one uniform offset u in [0, 1).
ParticleSet resample_systematic(const ParticleSet& ps, double u);
ParticleSet resample_systematic(const ParticleSet& ps, std::uint64_t seed, std::uint64_t step);

/// Weighted mean of b; w averaged in the axis-angle chart after aligning each
/// sample to the chart of the highest-weight particle.
LumpedErrorParams estimate(const ParticleSet& ps);

}  // namespace shafttrack
