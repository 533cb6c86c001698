// Acceptance driver: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "random_cylinders.hpp"
#include "shafttrack/config.hpp"
#include "shafttrack/cylinder.hpp"
#include "shafttrack/detection.hpp"
#include "shafttrack/harness.hpp"
#include "shafttrack/observation.hpp"
#include "shafttrack/particle_filter.hpp"

using namespace shafttrack;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

// Angle/offset distance between two normal-form lines, folding the theta wrap.
std::pair<double, double> line_gap(const PolarLine& a, const PolarLine& b) {
  double dt = a.theta - b.theta, rb = b.rho;
  if (dt > std::numbers::pi / 2) {
    dt -= std::numbers::pi;
    rb = -rb;
  } else if (dt < -std::numbers::pi / 2) {
    dt += std::numbers::pi;
    rb = -rb;
  }
  return {std::abs(dt), std::abs(a.rho - rb)};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome projection_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  double worst_t = 0.0, worst_r = 0.0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    const CylinderSpec cyl = testing::random_visible_cylinder(rng);
    const auto lines = project_cylinder(cyl);
    const LinePair oracle = silhouette_oracle(cyl);
    for (int k = 0; k < 2; ++k) {
      const auto [dt, dr] = line_gap(implicit_to_polar(lines[k]), oracle[k]);
      worst_t = std::max(worst_t, dt);
      worst_r = std::max(worst_r, dr);
    }
  }
  const double secs = seconds_since(t0);
  return {worst_t < 1e-3 && worst_r < 1e-4 && secs < 10.0,
          fmt("%d poses, max |dtheta| %.2e rad, max |drho| %.2e, %.2f s", n, worst_t, worst_r, secs)};
}

Outcome residual_variance() {
  const auto t0 = Clock::now();
  const double sigma = 2.0;
  const int n = 10000;
  double worst = 0.0;
  for (int a = 0; a < 8; ++a) {
    const PolarLine l{a * std::numbers::pi / 8.0 + 0.05, 250.0};
    const Vec2 nrm(std::cos(l.theta), std::sin(l.theta)), dir(-nrm.y(), nrm.x());
    std::mt19937_64 rng(500 + a);
    std::normal_distribution<double> off(0.0, sigma);
    std::uniform_real_distribution<double> along(-400.0, 400.0);
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const Vec2 p = l.rho * nrm + along(rng) * dir + off(rng) * nrm;
      const double r = residual_r(p, l);
      sum += r;
      sq += r * r;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    worst = std::max(worst, std::abs(var / (sigma * sigma) - 1.0));
  }
  const double secs = seconds_since(t0);
  return {worst < 0.05 && secs < 5.0, fmt("8 angles, worst relative variance error %.4f, %.2f s", worst, secs)};
}

Outcome argmax_invariance() {
  const auto t0 = Clock::now();
  AppConfig cfg = default_config();
  auto& d = cfg.scenario.detector;
  d.pixel_noise_sigma = 0.0;
  d.outlier_count = 0;
  d.endpoint_dropout_prob = 0.0;
  const LumpedErrorParams gt = cfg.scenario.gt_initial;
  const FrameRecord rec = synthesize_frame(cfg.scenario, 10, gt);
  const ShaftModel model = shaft_model(cfg.scenario);
  const auto& o = cfg.observation;

  // {-1, 0, 1}^6 at steps 2e-4 and 1e-3 (metres for b, radians for w)
  std::vector<Vec6> grid;
  for (double scale : {1.0, 5.0}) {
    for (int code = 0; code < 729; ++code) {
      Vec6 step;
      int c = code;
      for (int k = 0; k < 6; ++k, c /= 3) step(k) = (c % 3 - 1) * scale * (k < 3 ? 2e-4 : 2e-4);
      if (!step.isZero()) grid.push_back(step);
    }
  }

  std::string failures;
  for (auto kind : kAllModels) {
    const Evidence ev = prepare_evidence(kind, rec.frame, o.extraction, o.ransac);
    const double at_gt = score_evidence(ev, *project_shaft(model, rec.q, gt), o.polar, o.intensity);
    int beaten = 0;
    for (const Vec6& step : grid) {
      const auto lines = project_shaft(model, rec.q, LumpedErrorParams::from_vector(gt.as_vector() + step));
      if (!lines) continue;
      if (score_evidence(ev, *lines, o.polar, o.intensity) > at_gt) ++beaten;
    }
    if (beaten > 0) failures += fmt(" %s(%d)", model_name(kind), beaten);
  }
  const double secs = seconds_since(t0);
  return {failures.empty() && secs < 30.0,
          fmt("5 models x %zu perturbations, %s, %.2f s", grid.size(),
              failures.empty() ? "ground truth is the maximum for all" : ("beaten:" + failures).c_str(), secs)};
}

AppConfig seeded(std::uint64_t s) {
  AppConfig cfg = default_config();
  cfg.scenario.seed = s;
  cfg.filter.seed = s + 100;
  return cfg;
}

Outcome filter_convergence() {
  constexpr std::array proposed = {ObservationModelKind::EndpointIntensitiesToPolar,
                                   ObservationModelKind::LineIntensitiesToPolar,
                                   ObservationModelKind::EndpointIntensities, ObservationModelKind::LineIntensities};
  std::vector<std::vector<FrameRecord>> data;
  for (std::uint64_t s = 1; s <= 5; ++s) data.push_back(generate_scenario(seeded(s).scenario));
  bool pass = true;
  std::string detail;
  for (auto kind : proposed) {
    const auto t0 = Clock::now();
    std::vector<double> mean, fin;
    for (std::uint64_t s = 1; s <= 5; ++s) {
      const auto r = run_tracking(data[s - 1], kind, seeded(s));
      mean.push_back(r.metrics.mean_pct);
      fin.push_back(r.metrics.accumulated_error_pct.back());
    }
    const double secs = seconds_since(t0);
    const double mm = median(mean), mf = median(fin);
    pass = pass && mm < 5.0 && mf < 5.0 && secs < 120.0;
    detail += fmt("%s%s median mean %.2f%% final %.2f%% (%.1f s)", detail.empty() ? "" : "; ", model_name(kind), mm,
                  mf, secs);
  }
  return {pass, detail};
}

Outcome dropout_degradation() {
  const auto t0 = Clock::now();
  int wins = 0;
  std::string per_seed;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    AppConfig cfg = seeded(s);
    cfg.scenario.detector.endpoint_dropout_prob = 0.5;
    const auto ds = generate_scenario(cfg.scenario);
    const double li = run_tracking(ds, ObservationModelKind::LineIntensities, cfg).metrics.mean_pct;
    const double ep = run_tracking(ds, ObservationModelKind::EndpointToPolar, cfg).metrics.mean_pct;
    wins += li <= ep;
    per_seed += fmt(" %.2f/%.2f", li, ep);
  }
  const double secs = seconds_since(t0);
  return {wins >= 8 && secs < 300.0,
          fmt("line_intensities <= endpoint_to_polar in %d/10 seeds (li/ep %%:%s), %.1f s", wins, per_seed.c_str(),
              secs)};
}

Outcome ransac_recovery() {
  const auto t0 = Clock::now();
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed + 7000);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::uniform_real_distribution<double> ux(0.0, 640.0), uy(0.0, 480.0);
    const Vec2 a1(80, 40), b1(520, 420), a2(120, 40), b2(580, 400);
    std::array<PolarLine, 2> planted;
    PointSet pts;
    int k = 0;
    for (const auto& [a, b] : {std::pair{a1, b1}, std::pair{a2, b2}}) {
      const Vec2 dir = (b - a).normalized();
      Vec2 n(-dir.y(), dir.x());
      double th = std::atan2(n.y(), n.x());
      if (th < 0) th += std::numbers::pi;
      n = Vec2(std::cos(th), std::sin(th));
      planted[k++] = {th, n.dot(a)};
      for (int i = 0; i < 40; ++i) pts.push_back(a + (b - a) * (i / 39.0) + noise(rng) * n);
    }
    for (int i = 0; i < 20; ++i) pts.push_back(Vec2(ux(rng), uy(rng)));  // 20% of 100
    RansacParams rp;
    rp.seed = seed;
    const auto found = sequential_ransac_two_lines(pts, rp);
    if (found.size() != 2) continue;
    const auto close = [](const PolarLine& a, const PolarLine& b) {
      const auto [dt, dr] = line_gap(a, b);
      return dt <= 0.01 && dr <= 0.5;
    };
    ok += (close(found[0].line, planted[0]) && close(found[1].line, planted[1])) ||
          (close(found[0].line, planted[1]) && close(found[1].line, planted[0]));
  }
  const double secs = seconds_since(t0);
  return {ok >= 95 && secs < 10.0, fmt("%d/100 seeds recovered, %.2f s", ok, secs)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + SHAFTTRACK_CLI_PATH + "\" " + args;
  return std::system(cmd.c_str());
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / fmt("shafttrack_acceptance_%d", static_cast<int>(::getpid()));
  fs::create_directories(dir);
  const auto p = [&](const char* name) { return (dir / name).string(); };
  int rc = 0;
  rc |= run("simulate --seed 7 --out " + p("a.jsonl"));
  rc |= run("simulate --seed 7 --out " + p("b.jsonl"));
  rc |= run("track --dataset " + p("a.jsonl") + " --seed 11 --threads 1 --out " + p("t1.json"));
  rc |= run("track --dataset " + p("a.jsonl") + " --seed 11 --threads 1 --out " + p("t1b.json"));
  rc |= run("track --dataset " + p("b.jsonl") + " --seed 11 --threads 4 --out " + p("t4.json"));
  rc |= run("track --dataset " + p("a.jsonl") + " --seed 11 --threads 3 --simd scalar --out " + p("t3s.json"));
  Outcome out;
  if (rc != 0) {
    out.detail = "CLI invocation failed";
  } else {
    const std::string da = slurp(p("a.jsonl")), db = slurp(p("b.jsonl"));
    const std::string t1 = slurp(p("t1.json")), t1b = slurp(p("t1b.json")), t4 = slurp(p("t4.json")),
                      t3 = slurp(p("t3s.json"));
    const bool same_data = !da.empty() && da == db;
    const bool same_runs = !t1.empty() && t1 == t1b;
    const bool same_threads = t1 == t4;
    const bool same_isa = t1 == t3;
    out.pass = same_data && same_runs && same_threads && same_isa;
    out.detail = fmt("dataset %s, repeat run %s, threads 1 vs 4 %s, threads 3 scalar kernels %s",
                     same_data ? "identical" : "DIFFERS", same_runs ? "identical" : "DIFFERS",
                     same_threads ? "identical" : "DIFFERS", same_isa ? "identical" : "DIFFERS");
  }
  fs::remove_all(dir);
  return out;
}

Outcome metric_arithmetic() {
  const CameraIntrinsics k;
  const double diag = std::sqrt(1080.0 * 1080.0 + 1920.0 * 1920.0);
  const double pct = tip_error_percent(110.15, k);
  bool pass = std::abs(k.diagonal() - diag) < 1e-9 && std::abs(pct - 100.0 * 110.15 / diag) < 1e-6 &&
              std::round(pct * 100.0) == 500.0;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<double> x(1000);
  for (auto& v : x) v = u(rng);
  const auto acc = accumulated_error(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) s += x[j];
    pass = pass && acc[i] == s / static_cast<double>(i + 1);
  }
  return {pass, fmt("diagonal %.10f px, 110.15 px -> %.6f%%, prefix means exact over 1000 values", k.diagonal(), pct)};
}

}  // namespace

// `--known-failure N` (repeatable) lets a documented failing criterion keep
// printing FAIL without failing the exit status.
int main(int argc, char** argv) {
  std::vector<int> known;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--known-failure") known.push_back(std::atoi(argv[++i]));
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"1 projection matches silhouette oracle", projection_oracle},
      {"2 residual variance", residual_variance},
      {"3 argmax at ground truth", argmax_invariance},
      {"4 filter convergence", filter_convergence},
      {"5 dropout degradation", dropout_degradation},
      {"6 RANSAC planted lines", ransac_recovery},
      {"7 determinism", determinism},
      {"8 metric arithmetic", metric_arithmetic},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool excused = std::find(known.begin(), known.end(), index) != known.end();
    failed += !o.pass && !excused;
    std::printf("%s  %s: %s%s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(),
                !o.pass && excused ? " [known failure]" : "");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
