#include "shafttrack/particle_filter.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "shafttrack/parallel.hpp"

namespace shafttrack {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  std::uint64_t s = h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2));
  return splitmix64(s);
}

void check_spsd(const Mat6& m, const char* what) {
  if (!m.allFinite() || (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + ": covariance must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat6> eig(m, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + ": covariance must be positive semi-definite");
  }
}

Vec6 gaussian6(CounterRng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec6 z;
  for (int i = 0; i < 6; ++i) z(i) = n(rng);
  return z;
}

}  // namespace

void MotionParams::validate() const { check_spsd(cov, "motion"); }

void FilterConfig::validate() const {
  if (n_particles < 1) throw Error(ErrorCode::InvalidArgument, "filter: n_particles must be >= 1");
  if (!(resample_ess_fraction > 0.0 && resample_ess_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "filter: resample_ess_fraction must be in (0, 1]");
  }
  check_spsd(init_cov, "filter init");
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t step, std::uint64_t index, Stream stream)
    : state_(derive(seed, step, index, stream)) {}

std::uint64_t CounterRng::derive(std::uint64_t seed, std::uint64_t step, std::uint64_t index, Stream stream) {
  std::uint64_t h = mix(0x5EED5EED5EED5EEDULL, seed);
  h = mix(h, step);
  h = mix(h, index);
  return mix(h, static_cast<std::uint64_t>(stream));
}

CounterRng::result_type CounterRng::operator()() { return splitmix64(state_); }

Mat6 covariance_factor(const Mat6& cov) {
  Eigen::SelfAdjointEigenSolver<Mat6> eig(cov);
  const Vec6 sqrt_eval = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * sqrt_eval.asDiagonal();
}

ParticleSet initialize(const FilterConfig& cfg) {
  cfg.validate();
  const Mat6 factor = covariance_factor(cfg.init_cov);
  const Vec6 mean = cfg.init_mean.as_vector();
  const bool zero_cov = cfg.init_cov.isZero(0.0);
  ParticleSet ps(static_cast<std::size_t>(cfg.n_particles));
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (zero_cov) {
      ps[i].params = cfg.init_mean;
    } else {
      CounterRng rng(cfg.seed, 0, i, CounterRng::Stream::Init);
      ps[i].params = LumpedErrorParams::from_vector(mean + factor * gaussian6(rng));
    }
    ps[i].log_weight = 0.0;
  }
  return ps;
}

ParticleSet predict(const ParticleSet& ps, const MotionParams& mp, std::uint64_t seed, std::uint64_t step,
                    int threads) {
  ParticleSet out = ps;
  if (mp.cov.isZero(0.0)) return out;
  const Mat6 factor = covariance_factor(mp.cov);
  parallel_for(ps.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      CounterRng rng(seed, step, i, CounterRng::Stream::Motion);
      out[i].params = LumpedErrorParams::from_vector(ps[i].params.as_vector() + factor * gaussian6(rng));
    }
  });
  return out;
}

std::optional<LinePair> project_shaft(const ShaftModel& model, std::span<const double> q,
                                      const LumpedErrorParams& params) {
  const Pose shaft_frame = forward_kinematics(*model.chain, q, pose_from_params(params), model.shaft_joint_index + 1);
  return project_cylinder_to_pixels(transform_cylinder(shaft_frame, model.shaft), model.camera);
}

ParticleSet update(const ParticleSet& ps, const Evidence& evidence, const ShaftModel& model,
                   std::span<const double> q, const PolarObsParams& pp, const IntensityObsParams& ip, int threads) {
  if (evidence.skip) return ps;
  ParticleSet out = ps;
  parallel_for(ps.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (ps[i].log_weight == kNegInf) continue;
      const auto lines = project_shaft(model, q, ps[i].params);
      out[i].log_weight = lines ? ps[i].log_weight + score_evidence(evidence, *lines, pp, ip) : kNegInf;
    }
  });
  double max_lw = kNegInf;
  for (const auto& p : out) max_lw = std::max(max_lw, p.log_weight);
  if (max_lw == kNegInf) {
    throw Error(ErrorCode::AllParticlesInvalid, "update: every particle projects invalidly");
  }
  for (auto& p : out) p.log_weight -= max_lw;
  return out;
}

std::vector<double> normalized_weights(const ParticleSet& ps) {
  double max_lw = kNegInf;
  for (const auto& p : ps) max_lw = std::max(max_lw, p.log_weight);
  if (ps.empty() || max_lw == kNegInf || std::isnan(max_lw)) {
    throw Error(ErrorCode::DegenerateWeights, "all particle weights are zero");
  }
  std::vector<double> w(ps.size());
  double total = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    w[i] = std::exp(ps[i].log_weight - max_lw);
    total += w[i];
  }
  for (auto& v : w) v /= total;
  return w;
}

double effective_sample_size(const ParticleSet& ps) {
  const auto w = normalized_weights(ps);
  double sq = 0.0;
  for (double v : w) sq += v * v;
  return 1.0 / sq;
}

ParticleSet resample_systematic(const ParticleSet& ps, double u) {
  const auto w = normalized_weights(ps);
  const std::size_t n = ps.size();
  ParticleSet out;
  out.reserve(n);
  double cumulative = w[0];
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double target = (static_cast<double>(i) + u) / static_cast<double>(n);
    while (target >= cumulative && j + 1 < n) cumulative += w[++j];
    out.push_back({ps[j].params, 0.0});
  }
  return out;
}

ParticleSet resample_systematic(const ParticleSet& ps, std::uint64_t seed, std::uint64_t step) {
  CounterRng rng(seed, step, 0, CounterRng::Stream::Resample);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return resample_systematic(ps, unit(rng));
}

LumpedErrorParams estimate(const ParticleSet& ps) {
  const auto w = normalized_weights(ps);
  const auto best = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
  const Vec3 ref = ps[best].params.w();
  Vec3 b_mean = Vec3::Zero();
  Vec3 w_mean = Vec3::Zero();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (w[i] == 0.0) continue;
    b_mean += w[i] * ps[i].params.b();
    Vec3 wi = ps[i].params.w();
    const double n = wi.norm();
    if (n > 0.0) {
      const Vec3 alt = wi * (1.0 - 2.0 * std::numbers::pi / n);
      if ((alt - ref).squaredNorm() < (wi - ref).squaredNorm()) wi = alt;
    }
    w_mean += w[i] * wi;
  }
  return {b_mean, w_mean};
}

}  // namespace shafttrack
