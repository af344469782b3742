#pragma once

// End-to-end composition: localize centers, fit boxes, prune ghosts, and
// annotate every frame of a sequence.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "tmo3d/boxfit.hpp"
#include "tmo3d/config.hpp"
#include "tmo3d/export.hpp"
#include "tmo3d/io/annotation_io.hpp"
#include "tmo3d/io/map_file.hpp"
#include "tmo3d/refine.hpp"
#include "tmo3d/sequence.hpp"
#include "tmo3d/triangulate.hpp"

namespace tmo3d {

struct MapBuild {
  std::vector<ObjectBox3D> boxes;  // object_id = position in this list
  LocalizationStats stats;
  std::size_t centers = 0;
  std::size_t unfitted = 0;  // centers whose every view was degenerate
};

/// Fits a box to every localized center; ids are positions in the output.
inline MapBuild fit_boxes(const LocalizationResult& loc, const Sequence& seq, const PipelineConfig& cfg) {
  MapBuild out;
  out.stats = loc.stats;
  out.centers = loc.centers.size();
  for (const auto& c : loc.centers) {
    const auto id = static_cast<std::int64_t>(out.boxes.size());
    auto box = fit_box(c, id, loc.observations, seq.detections, seq.poses, seq.rig, cfg.boxfit);
    if (box) {
      out.boxes.push_back(std::move(*box));
    } else {
      ++out.unfitted;
    }
  }
  return out;
}

/// Unrefined ECEF map: every localized center that yields a box.
inline MapBuild build_map(const Sequence& seq, const PipelineConfig& cfg) {
  cfg.validate();
  return fit_boxes(localize_centers(seq.detections, seq.poses, seq.rig, cfg.triangulation), seq, cfg);
}

struct MapResult {
  MapBuild build;
  RefineResult refine;  // refine.survivors is the final map

  const std::vector<ObjectBox3D>& map() const { return refine.survivors; }
};

inline MapResult build_refined_map(const Sequence& seq, const PipelineConfig& cfg) {
  MapResult r;
  r.build = build_map(seq, cfg);
  r.refine = refine(r.build.boxes, seq, cfg.refine_config());
  return r;
}

struct AnnotateStats {
  std::size_t frames_written = 0;
  std::size_t frames_without_pose = 0;
  std::size_t objects_annotated = 0;
};

/// Annotates each frame in frame order and hands it to `sink`; nothing is
/// retained between frames. Frames outside the pose track are skipped.
template <class Sink>
AnnotateStats annotate_sequence(const Sequence& seq, std::span<const ObjectBox3D> map, const ExportConfig& cfg,
                                Sink&& sink) {
  cfg.validate();
  const DetectionIndex index(seq.detections);
  AnnotateStats stats;
  std::vector<Detection2D> frame_detections;
  for (const auto& frame : seq.frames) {
    if (!seq.poses.covers(frame.timestamp)) {
      ++stats.frames_without_pose;
      continue;
    }
    frame_detections.clear();
    for (const auto& cam : frame.cameras) {
      for (auto i : index.at(frame.frame_id, cam)) frame_detections.push_back(seq.detections[i]);
    }
    const auto ann = annotate_frame(map, frame.frame_id, seq.poses.at(frame.timestamp), seq.rig, cfg, frame_detections);
    stats.objects_annotated += ann.objects.size();
    ++stats.frames_written;
    sink(ann);
  }
  return stats;
}

inline std::vector<FrameAnnotation> annotate_sequence(const Sequence& seq, std::span<const ObjectBox3D> map,
                                                      const ExportConfig& cfg) {
  std::vector<FrameAnnotation> out;
  annotate_sequence(seq, map, cfg, [&](const FrameAnnotation& a) { out.push_back(a); });
  return out;
}

inline constexpr const char* kMapFileName = "map.json";

struct AnnotateRun {
  std::optional<MapResult> map;  // absent when a precomputed map was supplied
  std::size_t map_objects = 0;
  AnnotateStats annotate;
};

/// Full run for one sequence. Writes `<out_dir>/<frame_id>.json` for every
/// frame plus `<out_dir>/map.json`. With `precomputed`, localization and
/// refinement are skipped and that map is annotated as is.
inline AnnotateRun run_annotate(const Sequence& seq, const std::filesystem::path& out_dir,
                                const PipelineConfig& cfg,
                                std::optional<std::vector<ObjectBox3D>> precomputed = std::nullopt) {
  cfg.validate();
  AnnotateRun run;
  std::vector<ObjectBox3D> map;
  if (precomputed) {
    map = std::move(*precomputed);
  } else {
    run.map = build_refined_map(seq, cfg);
    map = run.map->map();
  }
  run.map_objects = map.size();
  io::AnnotationWriter writer(out_dir);
  io::write_map(map, out_dir / kMapFileName);
  run.annotate = annotate_sequence(seq, map, cfg.export_, [&](const FrameAnnotation& a) { writer.write(a); });
  return run;
}

}  // namespace tmo3d
