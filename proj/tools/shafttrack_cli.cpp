// shafttrack: synthetic scenario generation, tracking and model comparison.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "shafttrack/config.hpp"
#include "shafttrack/dataset.hpp"
#include "shafttrack/error.hpp"
#include "shafttrack/harness.hpp"
#include "shafttrack/kernels.hpp"
#include "shafttrack/overlay.hpp"

using namespace shafttrack;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string model = "line_intensities";
  std::optional<int> particles;
  std::optional<int> threads;
  std::string out;
  std::string dataset;
  std::string report;
  long frame = 0;
  std::string simd = "auto";
};

AppConfig load(const Options& o) {
  AppConfig cfg = o.config.empty() ? default_config() : load_config(o.config);
  if (o.particles) cfg.filter.n_particles = *o.particles;
  if (o.threads) cfg.threads = *o.threads;
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

std::string with_extension(const std::string& path, const std::string& ext) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + ext;
  return path.substr(0, dot) + ext;
}

// Dataset from --dataset, or generated in memory from the scenario config.
std::vector<FrameRecord> dataset_for(const Options& o, const AppConfig& cfg) {
  if (!o.dataset.empty()) {
    return load_frames(o.dataset, ImageSize{cfg.scenario.camera.width, cfg.scenario.camera.height});
  }
  return generate_scenario(cfg.scenario);
}

const FrameRecord& pick_frame(const std::vector<FrameRecord>& ds, long t) {
  for (const auto& rec : ds) {
    if (rec.t == t) return rec;
  }
  throw Error(ErrorCode::InvalidArgument, "frame " + std::to_string(t) + " not in dataset");
}

std::string simulate(const Options& o) {
  AppConfig cfg = load(o);
  if (o.seed) cfg.scenario.seed = *o.seed;
  std::ostringstream out;
  write_frames(out, generate_scenario(cfg.scenario));
  return out.str();
}

std::string track(const Options& o) {
  AppConfig cfg = load(o);
  if (o.seed) cfg.filter.seed = *o.seed;
  const auto ds = dataset_for(o, cfg);
  const auto res = run_tracking(ds, model_from_name(o.model), cfg);
  return tracking_to_json(res, ds).dump(1) + "\n";
}

void compare(const Options& o) {
  AppConfig cfg = load(o);
  if (o.seed) cfg.filter.seed = *o.seed;
  const auto ds = dataset_for(o, cfg);
  const auto rows = compare_models(ds, cfg, kAllModels);
  const std::string csv = compare_to_csv(rows);
  write_text(o.out, csv);
  if (!o.out.empty() && o.out != "-") write_text(with_extension(o.out, ".json"), compare_to_json(rows, ds).dump(1) + "\n");
}

nlohmann::ordered_json line_json(const PolarLine& l) { return {{"theta", l.theta}, {"rho", l.rho}}; }

std::string project(const Options& o) {
  AppConfig cfg = load(o);
  const ScenarioConfig& s = cfg.scenario;
  LumpedErrorParams params = s.gt_initial;
  std::vector<double> q = joint_values(s, o.frame);
  if (!o.dataset.empty()) {
    const auto ds = dataset_for(o, cfg);
    const auto& rec = pick_frame(ds, o.frame);
    q = rec.q;
    if (rec.gt) params = LumpedErrorParams(rec.gt->b, rec.gt->w);
  }
  const Pose shaft_frame = forward_kinematics(s.chain, q, pose_from_params(params), s.shaft_joint_index + 1);
  const CylinderSpec cyl = transform_cylinder(shaft_frame, s.shaft);
  const auto unit = project_cylinder(cyl);
  nlohmann::ordered_json j;
  j["frame"] = o.frame;
  j["q"] = q;
  auto lines = nlohmann::ordered_json::array();
  for (const auto& l : unit) {
    const PolarLine p = implicit_to_polar(l);
    lines.push_back({{"implicit", {l.a, l.b, l.c}},
                     {"unit_polar", line_json(p)},
                     {"pixel_polar", line_json(polar_unit_to_pixel(p, s.camera).line)}});
  }
  j["lines"] = lines;
  const auto tip = tip_pixel(s, q, params);
  j["tip_px"] = tip ? nlohmann::ordered_json{tip->x(), tip->y()} : nlohmann::ordered_json(nullptr);
  return j.dump(1) + "\n";
}

void render(const Options& o) {
  if (o.out.empty()) throw Error(ErrorCode::InvalidArgument, "render needs --out");
  AppConfig cfg = load(o);
  const ScenarioConfig& s = cfg.scenario;
  const auto ds = dataset_for(o, cfg);
  const auto& rec = pick_frame(ds, o.frame);
  const auto kind = model_from_name(o.model);

  OverlayInput in;
  in.frame = &rec.frame;
  RansacParams rp = cfg.observation.ransac;
  rp.seed = CounterRng::derive(rp.seed, static_cast<std::uint64_t>(rec.t), 0, CounterRng::Stream::Ransac);
  in.point_sets.push_back(prepare_evidence(kind, rec.frame, cfg.observation.extraction, rp).points);
  if (rec.gt) {
    in.gt_tip = rec.gt->tip_px;
    in.projected = project_shaft(shaft_model(s), rec.q, LumpedErrorParams(rec.gt->b, rec.gt->w));
  }
  if (!o.report.empty()) {
    // Projected lines and tip from a `track` report's estimate at this frame.
    std::ifstream f(o.report);
    if (!f) throw Error(ErrorCode::IoError, "cannot open '" + o.report + "'");
    nlohmann::json report;
    try {
      report = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("report: ") + e.what());
    }
    for (const auto& e : report.at("trace")) {
      if (e.at("t").get<long>() != rec.t) continue;
      const auto b = e.at("b").get<std::vector<double>>();
      const auto w = e.at("w").get<std::vector<double>>();
      const LumpedErrorParams est(Vec3(b.at(0), b.at(1), b.at(2)), Vec3(w.at(0), w.at(1), w.at(2)));
      in.projected = project_shaft(shaft_model(s), rec.q, est);
      in.estimate_tip = tip_pixel(s, rec.q, est);
    }
  }
  render_overlay(in, o.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shaft-line particle-filter tracking on synthetic data"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config (defaults built in)");
    sub->add_option("--out", o.out, "output path ('-' or empty: stdout)");
    sub->add_option("--threads", o.threads, "worker threads for per-particle work")->check(CLI::PositiveNumber);
    sub->add_option("--simd", o.simd, "kernel ISA")->check(CLI::IsMember({"auto", "scalar", "avx2"}));
  };
  auto* sim = app.add_subcommand("simulate", "write a synthetic JSONL dataset");
  common(sim);
  sim->add_option("--seed", o.seed, "scenario seed");

  auto* trk = app.add_subcommand("track", "run the filter with one observation model");
  auto* cmp = app.add_subcommand("compare", "run all five observation models, write CSV and JSON");
  for (auto* sub : {trk, cmp}) {
    common(sub);
    sub->add_option("--dataset", o.dataset, "JSONL dataset (generated from the config when absent)");
    sub->add_option("--seed", o.seed, "filter seed");
    sub->add_option("--particles", o.particles, "particle count")->check(CLI::PositiveNumber);
  }
  trk->add_option("--model", o.model, "observation model");

  auto* prj = app.add_subcommand("project", "print the projected shaft lines for one frame");
  common(prj);
  prj->add_option("--dataset", o.dataset, "take q and ground truth from this dataset");
  prj->add_option("--frame", o.frame, "frame index");

  auto* rnd = app.add_subcommand("render", "draw one frame as SVG");
  common(rnd);
  rnd->add_option("--dataset", o.dataset, "JSONL dataset");
  rnd->add_option("--frame", o.frame, "frame index");
  rnd->add_option("--model", o.model, "observation model whose evidence is drawn");
  rnd->add_option("--report", o.report, "track report supplying the estimate");

  CLI11_PARSE(app, argc, argv);

  try {
    if (o.simd == "scalar") kernels::force_isa(kernels::Isa::Scalar);
    if (o.simd == "avx2") {
      if (!kernels::isa_available(kernels::Isa::Avx2)) throw Error(ErrorCode::InvalidArgument, "avx2 not available on this CPU");
      kernels::force_isa(kernels::Isa::Avx2);
    }
    if (sim->parsed()) write_text(o.out, simulate(o));
    if (trk->parsed()) write_text(o.out, track(o));
    if (cmp->parsed()) compare(o);
    if (prj->parsed()) write_text(o.out, project(o));
    if (rnd->parsed()) render(o);
  } catch (const Error& e) {
    std::fprintf(stderr, "shafttrack: %s: %s\n", to_string(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "shafttrack: %s\n", e.what());
    return 2;
  }
  return 0;
}
