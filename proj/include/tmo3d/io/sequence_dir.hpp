#pragma once

// On-disk sequence layout:
//
//   <sequence>/poses.txt         pose file (see pose_file.hpp)
//   <sequence>/detections.txt    detection file (see detection_file.hpp)
//   <sequence>/calibration.json  calibration file (see calibration_file.hpp)
//
// The simulator additionally writes ground truth next to these inputs:
//
//   <sequence>/ground_truth/<frame_id>.json  annotations from the true poses
//   <sequence>/ground_truth_map.json         true boxes in ECEF
//   <sequence>/ghosts_map.json               injected phantom boxes (if any)
//   <sequence>/true_poses.txt                noiseless trajectory

#include <filesystem>
#include <string>

#include "tmo3d/error.hpp"
#include "tmo3d/export.hpp"
#include "tmo3d/io/annotation_io.hpp"
#include "tmo3d/io/calibration_file.hpp"
#include "tmo3d/io/detection_file.hpp"
#include "tmo3d/io/map_file.hpp"
#include "tmo3d/io/pose_file.hpp"
#include "tmo3d/sequence.hpp"
#include "tmo3d/sim.hpp"

namespace tmo3d::io {

inline constexpr const char* kPosesFile = "poses.txt";
inline constexpr const char* kDetectionsFile = "detections.txt";
inline constexpr const char* kCalibrationFile = "calibration.json";
inline constexpr const char* kGroundTruthDir = "ground_truth";
inline constexpr const char* kGroundTruthMapFile = "ground_truth_map.json";
inline constexpr const char* kGhostsMapFile = "ghosts_map.json";
inline constexpr const char* kTruePosesFile = "true_poses.txt";

inline Sequence load_sequence(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "sequence directory not found: '" + dir.string() + "'");
  }
  Sequence seq;
  seq.name = dir.filename().string();
  if (seq.name.empty()) seq.name = dir.parent_path().filename().string();
  seq.rig = read_calibration(dir / kCalibrationFile);
  seq.poses = read_poses(dir / kPosesFile);
  auto det = read_detections(dir / kDetectionsFile);
  for (const auto& f : det.frames) {
    for (const auto& c : f.cameras) {
      if (!seq.rig.find(c)) {
        throw Error(ErrorCode::kValidation, (dir / kDetectionsFile).string() + ": frame " +
                                                std::to_string(f.frame_id) + " uses uncalibrated camera '" +
                                                c + "'");
      }
    }
  }
  seq.detections = std::move(det.detections);
  seq.frames = std::move(det.frames);
  return seq;
}

inline void write_sequence_inputs(const Sequence& seq, const std::filesystem::path& dir) {
  ensure_directory(dir);
  write_text_file(dir / kPosesFile, format_poses(seq.poses));
  write_text_file(dir / kDetectionsFile, format_detections(seq.detections, seq.frames));
  write_text_file(dir / kCalibrationFile, dump_fixed(to_json(seq.rig)));
}

/// Pipeline inputs plus ground truth for one simulated run.
inline void write_simulation(const sim::SimOutput& out, const std::filesystem::path& dir,
                             const ExportConfig& export_cfg) {
  write_sequence_inputs(sim::to_sequence(out, dir.filename().string()), dir);
  write_text_file(dir / kTruePosesFile, format_poses(out.true_poses));
  write_map(out.ground_truth, dir / kGroundTruthMapFile);
  if (!out.ghosts.empty()) write_map(out.ghosts, dir / kGhostsMapFile);
  AnnotationWriter writer(dir / kGroundTruthDir);
  for (const auto& f : out.frames) {
    writer.write(annotate_frame(out.ground_truth, f.frame_id, out.true_poses.at(f.timestamp), out.rig, export_cfg));
  }
}

}  // namespace tmo3d::io
