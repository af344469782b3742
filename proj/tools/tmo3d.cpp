// Command-line entry point: simulate, annotate, evaluate, map.
//
// Exit codes: 0 success, 1 invalid input or configuration, 2 runtime failure.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "tmo3d/config.hpp"
#include "tmo3d/eval.hpp"
#include "tmo3d/io/annotation_io.hpp"
#include "tmo3d/io/map_file.hpp"
#include "tmo3d/io/report_file.hpp"
#include "tmo3d/io/scene_file.hpp"
#include "tmo3d/io/sequence_dir.hpp"
#include "tmo3d/pipeline.hpp"
#include "tmo3d/sim.hpp"

namespace fs = std::filesystem;
using namespace tmo3d;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;

int exit_code_for(const Error& e) {
  return e.is_validation() || e.code() == ErrorCode::kSequenceTooShort ? kExitInvalid : kExitRuntime;
}

struct ConfigOptions {
  std::string config_path;
  bool print_config = false;
  std::map<std::string, std::string> overrides;  // field name -> text
};

/// One `--section.key` option per registry field, with its default in the help.
void add_config_options(CLI::App& app, ConfigOptions& opts) {
  app.add_option("-c,--config", opts.config_path, "JSON configuration file");
  app.add_flag("--print-config", opts.print_config, "print the effective configuration as JSON and exit");
  PipelineConfig defaults;
  for (const auto& f : config_fields(defaults)) {
    auto* opt = app.add_option("--" + f.name(), opts.overrides[f.name()],
                               f.help + " [default: " + field_value_text(f) + "]");
    opt->group("Configuration (" + f.section + ")");
    opt->type_name("");
  }
}

PipelineConfig resolve_config(const CLI::App& app, const ConfigOptions& opts) {
  PipelineConfig cfg = opts.config_path.empty() ? PipelineConfig{} : load_config(opts.config_path);
  const auto fields = config_fields(cfg);
  for (const auto& f : fields) {
    if (app.count("--" + f.name()) == 0) continue;
    apply_text_value(f, opts.overrides.at(f.name()));
  }
  cfg.validate();
  return cfg;
}

void configure_logging(const std::string& level) {
  auto logger = spdlog::stderr_color_mt("tmo3d");
  logger->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  logger->set_level(spdlog::level::from_str(level));
  spdlog::set_default_logger(logger);
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string scene;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& a, const PipelineConfig& cfg) {
  auto spec = io::read_scene(a.scene);
  if (a.seed) spec.seed = *a.seed;
  const auto out = sim::generate_scene(spec);
  io::write_simulation(out, a.out, cfg.export_);
  spdlog::info("simulated {} frames, {} detections, {} objects, {} ghosts -> {}", out.frames.size(),
               out.detections.size(), out.ground_truth.size(), out.ghosts.size(), a.out);
  return kExitOk;
}

// ---------------------------------------------------------------- annotate

struct AnnotateArgs {
  std::vector<std::string> sequences;
  std::string out;
  std::string map;
};

void log_run(const std::string& name, const AnnotateRun& run) {
  if (run.map) {
    const auto& s = run.map->build.stats;
    spdlog::info("[{}] detections {} (confident {}, without pose {}), rays {}, candidates {}, clusters {}, noise {}",
                 name, s.detections_in, s.detections_confident, s.skipped_no_pose, s.rays, s.candidates, s.clusters,
                 s.noise);
    const auto& r = run.map->refine;
    spdlog::info("[{}] boxes {} (unfitted {}), unverifiable {}, sightline groups {}, kept {}", name,
                 run.map->build.boxes.size(), run.map->build.unfitted, r.unverifiable.size(), r.groups.size(),
                 r.survivors.size());
  }
  spdlog::info("[{}] map objects {}, frames written {}, frames without pose {}, annotated objects {}", name,
               run.map_objects, run.annotate.frames_written, run.annotate.frames_without_pose,
               run.annotate.objects_annotated);
}

int cmd_annotate(const AnnotateArgs& a, const PipelineConfig& cfg) {
  std::optional<std::vector<ObjectBox3D>> precomputed;
  if (!a.map.empty()) {
    precomputed = io::read_map(a.map);
    spdlog::info("using precomputed map {} ({} objects)", a.map, precomputed->size());
  }
  std::vector<std::string> names;
  for (const auto& s : a.sequences) {
    auto name = fs::path(s).filename().string();
    if (name.empty()) name = fs::path(s).parent_path().filename().string();
    if (std::find(names.begin(), names.end(), name) != names.end()) {
      throw Error(ErrorCode::kValidation, "two sequences share the directory name '" + name + "'");
    }
    names.push_back(name);
  }

  std::vector<int> status(a.sequences.size(), kExitOk);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < a.sequences.size(); i = next++) {
      const auto& name = names[i];
      try {
        const auto seq = io::load_sequence(a.sequences[i]);
        spdlog::info("[{}] loaded {} poses, {} frames, {} detections, {} cameras", name, seq.poses.size(),
                     seq.frames.size(), seq.detections.size(), seq.rig.cameras().size());
        const auto run = run_annotate(seq, fs::path(a.out) / name, cfg, precomputed);
        log_run(name, run);
      } catch (const Error& e) {
        spdlog::error("[{}] {}", name, e.what());
        status[i] = exit_code_for(e);
      } catch (const std::exception& e) {
        spdlog::error("[{}] {}", name, e.what());
        status[i] = kExitRuntime;
      }
    }
  };
  const std::size_t n = std::min(cfg.runtime.workers, a.sequences.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const auto failed = std::count_if(status.begin(), status.end(), [](int s) { return s != kExitOk; });
  if (failed > 0) spdlog::error("{} of {} sequences failed", failed, status.size());
  return *std::max_element(status.begin(), status.end());
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string pred;
  std::string gt;
  std::string out;
};

int cmd_evaluate(const EvaluateArgs& a, const PipelineConfig& cfg) {
  const auto pred = io::read_sequence(a.pred);
  const auto gt = io::read_sequence(a.gt);
  const auto report = eval::evaluate(pred, gt, cfg.eval);
  if (!report.frames_only_in_pred.empty() || !report.frames_only_in_gt.empty()) {
    spdlog::warn("frame sets differ: {} only in predictions, {} only in ground truth; evaluating the intersection",
                 report.frames_only_in_pred.size(), report.frames_only_in_gt.size());
  }
  if (report.frames_evaluated == 0) spdlog::warn("no frame is present on both sides; metrics are absent");
  if (!a.out.empty()) {
    io::write_report(report, a.out);
    spdlog::info("report written to {}", a.out);
  }
  std::cout << io::report_summary(report);
  return kExitOk;
}

// ---------------------------------------------------------------- map

struct MapArgs {
  std::string sequence;
  std::string out;
  std::string inspect;
};

int cmd_map_build(const MapArgs& a, const PipelineConfig& cfg) {
  const auto seq = io::load_sequence(a.sequence);
  auto result = build_refined_map(seq, cfg);
  AnnotateRun run;
  run.map_objects = result.map().size();
  io::write_map(result.map(), a.out);
  run.map = std::move(result);
  log_run(seq.name, run);
  spdlog::info("map with {} objects written to {}", run.map_objects, a.out);
  return kExitOk;
}

int cmd_map_inspect(const MapArgs& a) {
  const auto map = io::read_map(a.inspect);
  std::printf("%-6s %-14s %14s %15s %9s %7s %7s %7s %8s %8s  %s\n", "id", "class", "latitude", "longitude",
              "altitude", "width", "depth", "height", "yaw_deg", "support", "attributes");
  for (const auto& b : map) {
    const auto g = ecef_to_wgs84(b.center);
    std::string attrs;
    for (const auto& [k, v] : b.attributes) attrs += (attrs.empty() ? "" : " ") + k + "=" + v;
    std::printf("%-6lld %-14s %14.8f %15.8f %9.3f %7.3f %7.3f %7.3f %8.2f %8lld  %s\n",
                static_cast<long long>(b.object_id), std::string(to_string(b.cls)).c_str(), g.latitude,
                g.longitude, g.altitude, b.extent.width, b.extent.depth, b.extent.height, b.yaw * kRadToDeg,
                static_cast<long long>(b.support), attrs.c_str());
  }
  std::printf("%zu objects\n", map.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Auto-annotation of traffic lights and signs in 3D from 2D detections and ego poses"};
  app.require_subcommand(1);
  app.fallthrough();
  ConfigOptions copts;
  add_config_options(app, copts);

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic sequence with ground truth");
  simulate->add_option("-s,--scene", sim_args.scene, "scene spec JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("-o,--out", sim_args.out, "output sequence directory")->required();
  simulate->add_option("--seed", sim_args.seed, "override the scene seed");

  AnnotateArgs ann_args;
  auto* annotate = app.add_subcommand("annotate", "annotate sequences; writes <out>/<sequence>/<frame_id>.json and map.json");
  annotate->add_option("sequences", ann_args.sequences, "sequence directories")->required()->check(CLI::ExistingDirectory);
  annotate->add_option("-o,--out", ann_args.out, "output root directory")->required();
  annotate->add_option("--map", ann_args.map, "precomputed ECEF map; skips localization and refinement")
      ->check(CLI::ExistingFile);

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "compare predicted annotations with ground truth");
  evaluate->add_option("-p,--pred", eval_args.pred, "predicted annotation directory")->required();
  evaluate->add_option("-g,--gt", eval_args.gt, "ground-truth annotation directory")->required();
  evaluate->add_option("-o,--out", eval_args.out, "report directory (summary, JSON, per-bin CSV grids)");

  MapArgs map_args;
  auto* map = app.add_subcommand("map", "build or inspect an ECEF object map");
  map->require_subcommand(1);
  auto* map_build = map->add_subcommand("build", "localize, fit and refine boxes for one sequence");
  map_build->add_option("sequence", map_args.sequence, "sequence directory")->required()->check(CLI::ExistingDirectory);
  map_build->add_option("-o,--out", map_args.out, "output map file")->required();
  auto* map_inspect = map->add_subcommand("inspect", "print a map file as a table");
  map_inspect->add_option("file", map_args.inspect, "map file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  PipelineConfig cfg;
  try {
    cfg = resolve_config(app, copts);
  } catch (const Error& e) {
    std::fprintf(stderr, "tmo3d: %s\n", e.what());
    return exit_code_for(e);
  }
  configure_logging(cfg.runtime.log_level);
  if (copts.print_config) {
    std::cout << io::dump_fixed(config_to_json(cfg)) << "\n";
    return kExitOk;
  }

  try {
    if (*simulate) return cmd_simulate(sim_args, cfg);
    if (*annotate) return cmd_annotate(ann_args, cfg);
    if (*evaluate) return cmd_evaluate(eval_args, cfg);
    if (*map_build) return cmd_map_build(map_args, cfg);
    if (*map_inspect) return cmd_map_inspect(map_args);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}
