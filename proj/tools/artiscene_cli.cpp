// artiscene - articulated 3D scene graphs from point trajectories
//
// Command line driver. Exit codes: 0 ok, 2 invalid input, 3 estimation
// failure; errors go to stderr as one JSON object.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "artiscene/bundle.hpp"
#include "artiscene/config.hpp"
#include "artiscene/errors.hpp"
#include "artiscene/parallel.hpp"
#include "artiscene/pipeline.hpp"
#include "artiscene/sim.hpp"

namespace as = artiscene;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out = ".";
};

as::PipelineConfig load_config(const Globals& g) {
  as::PipelineConfig cfg;
  if (!g.config_path.empty()) cfg = as::config_from_json(as::read_json(g.config_path));
  if (g.seed) cfg.seed = *g.seed;
  return cfg;
}

std::vector<std::optional<as::ModeValue>> load_modes(const std::string& path) {
  std::vector<std::optional<as::ModeValue>> out;
  if (path.empty()) return out;
  const as::Json j = as::read_json(path);
  if (!j.is_array()) as::fail(as::ErrorKind::kValidation, path + ": expected an array of mode strings");
  for (const auto& m : j) {
    if (m.is_null()) {
      out.emplace_back(std::nullopt);
    } else if (m.is_string()) {
      out.emplace_back(as::mode_from_string(m.get<std::string>()));
    } else {
      as::fail(as::ErrorKind::kValidation, path + ": modes must be strings or null");
    }
  }
  return out;
}

void write_estimates(const as::EstimationResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  as::write_file_atomic(dir / "articulations.json", as::dump_json(as::estimation_json(r)));
}

// Every requested segment failed: nothing to hand to the next stage.
void check_estimates(const as::EstimationResult& r) {
  if (r.articulations.empty() && !r.failures.empty()) {
    const auto& f = r.failures.front();
    throw as::Error(f.kind, "all " + std::to_string(r.failures.size()) +
                                " segments failed; first: " + f.message);
  }
}

void write_report(const as::EvalReport& rep, const fs::path& dir) {
  fs::create_directories(dir);
  as::write_file_atomic(dir / "report.json", as::dump_json(as::report_json(rep)));
  const std::string table = as::report_table(rep);
  as::write_file_atomic(dir / "report.txt", table);
  std::cout << table;
}

int error_exit(as::ErrorKind kind, const std::string& message) {
  const as::Json j = {{"error", std::string(as::to_string(kind))}, {"message", message}};
  std::cerr << j.dump() << '\n';
  return as::Error(kind, "").is_estimation_failure() ? 3 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"articulated 3D scene graphs from point trajectories"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "pipeline config JSON")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--threads", g.threads, "worker cap (0 = hardware)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out, "output directory");

  std::string preset = "drawer";
  double point_sigma = -1, pixel_sigma = -1, depth_sigma = -1, drift = -1, dropout = -1;
  auto* sim = app.add_subcommand("simulate", "generate a synthetic scene bundle");
  sim->add_option("--preset", preset, "scene preset")
      ->check(CLI::IsMember(as::preset_names()));
  sim->add_option("--point-sigma", point_sigma, "3D point noise (m)");
  sim->add_option("--pixel-sigma", pixel_sigma, "track pixel noise (px)");
  sim->add_option("--depth-sigma", depth_sigma, "depth noise (m)");
  sim->add_option("--drift", drift, "track drift per frame (m)");
  sim->add_option("--dropout", dropout, "track dropout probability");

  std::string bundle_dir, segments_path, arts_path, modes_path, graph_dir, gt_path;
  auto* seg = app.add_subcommand("segment", "detect interaction segments");
  seg->add_option("--bundle", bundle_dir)->required()->check(CLI::ExistingDirectory);

  auto* est = app.add_subcommand("estimate", "estimate one articulation per segment");
  est->add_option("--bundle", bundle_dir)->required()->check(CLI::ExistingDirectory);
  est->add_option("--segments", segments_path)->required()->check(CLI::ExistingFile);
  est->add_option("--modes", modes_path, "JSON array of mode hints, one per segment")
      ->check(CLI::ExistingFile);

  auto* match = app.add_subcommand("match", "assign articulations to objects and build the graph");
  match->add_option("--bundle", bundle_dir)->required()->check(CLI::ExistingDirectory);
  match->add_option("--articulations", arts_path)->required()->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("eval", "score a graph against ground truth");
  eval->add_option("--graph", graph_dir, "directory holding graph.json")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval->add_option("--gt", gt_path, "gt.json")->required()->check(CLI::ExistingFile);

  auto* run = app.add_subcommand("run", "full pipeline on a bundle");
  run->add_option("--bundle", bundle_dir)->required()->check(CLI::ExistingDirectory);
  run->add_option("--modes", modes_path)->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return error_exit(as::ErrorKind::kValidation, e.what());
  }

  try {
    as::set_max_threads(g.threads);
    const as::PipelineConfig cfg = load_config(g);
    const fs::path out = g.out;

    if (*sim) {
      as::SceneSpec spec = as::preset(preset, cfg.seed);
      if (point_sigma >= 0) spec.noise.point_sigma = point_sigma;
      if (pixel_sigma >= 0) spec.noise.pixel_sigma = pixel_sigma;
      if (depth_sigma >= 0) spec.noise.depth_sigma = depth_sigma;
      if (drift >= 0) spec.noise.drift = drift;
      if (dropout >= 0) spec.noise.dropout = dropout;
      as::write_bundle(as::simulate(spec).bundle, out);
    } else if (*seg) {
      const as::SceneBundle b = as::read_bundle(bundle_dir);
      fs::create_directories(out);
      as::write_file_atomic(out / "segments.json", as::dump_json(as::segments_json(as::run_segment(b, cfg))));
    } else if (*est) {
      const as::SceneBundle b = as::read_bundle(bundle_dir);
      const auto segs = as::segments_from_json(as::read_json(segments_path));
      const auto r = as::run_estimate(b, segs, cfg, load_modes(modes_path));
      write_estimates(r, out);
      check_estimates(r);
    } else if (*match) {
      const as::SceneBundle b = as::read_bundle(bundle_dir);
      const auto r = as::estimation_from_json(as::read_json(arts_path));
      as::write_graph(as::run_match(b, r, cfg), out);
    } else if (*eval) {
      const as::SceneGraph graph = as::read_graph(graph_dir);
      const as::GroundTruth gt = as::gt_from_json(as::read_json(gt_path));
      write_report(as::evaluate(graph, gt, cfg.fold_angles), out);
    } else if (*run) {
      const as::SceneBundle b = as::read_bundle(bundle_dir);
      const auto segmentation = as::run_segment(b, cfg);
      fs::create_directories(out);
      as::write_file_atomic(out / "segments.json", as::dump_json(as::segments_json(segmentation)));
      const auto r = as::run_estimate(b, segmentation.segments, cfg, load_modes(modes_path));
      write_estimates(r, out);
      check_estimates(r);
      const as::SceneGraph graph = as::run_match(b, r, cfg);
      as::write_graph(graph, out);
      if (b.gt) write_report(as::evaluate(graph, *b.gt, cfg.fold_angles), out);
    }
  } catch (const as::Error& e) {
    return error_exit(e.kind(), e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_exit(as::ErrorKind::kValidation, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return error_exit(as::ErrorKind::kIo, e.what());
  }
  return 0;
}
