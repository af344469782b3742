#pragma once

// Object-center localization: detection-center sightlines are paired,
// close pairs yield candidate points, and DBSCAN clusters of candidates
// become object centers. No tracking is involved; association happens
// implicitly through 3D proximity.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tmo3d/camera.hpp"
#include "tmo3d/dbscan.hpp"
#include "tmo3d/error.hpp"
#include "tmo3d/geo.hpp"
#include "tmo3d/object.hpp"

namespace tmo3d {

struct Detection2D {
  std::int64_t frame_id = 0;
  double timestamp = 0.0;
  std::string camera_id;
  ObjectClass cls = ObjectClass::kTrafficLight;
  BBox2D bbox;
  double confidence = 1.0;
  Attributes attributes;
};

inline void validate(const Detection2D& d) {
  if (!d.bbox.valid()) throw Error(ErrorCode::kValidation, "degenerate bounding box");
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
    throw Error(ErrorCode::kValidation, "confidence outside [0, 1]");
  }
}

struct TriangulationConfig {
  double min_confidence = 0.7;
  double max_line_gap = 0.10;  // m
  double dbscan_eps = 0.08;    // m
  std::size_t dbscan_min_pts = 5;
  double min_ray_angle_deg = 0.5;
  double min_travel = 3.0;  // m
  double min_point_range = 3.0;  // m, candidates must lie this far along both rays

  void validate() const {
    const auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfig, what); };
    if (!(min_confidence > 0.0 && min_confidence <= 1.0)) fail("min_confidence must be in (0, 1]");
    if (!(max_line_gap > 0.0)) fail("max_line_gap must be positive");
    if (!(dbscan_eps > 0.0)) fail("dbscan_eps must be positive");
    if (dbscan_min_pts < 1) fail("dbscan_min_pts must be >= 1");
    if (!(min_ray_angle_deg > 0.0)) fail("min_ray_angle_deg must be positive");
    if (!(min_travel > 0.0)) fail("min_travel must be positive");
    if (!(min_point_range >= 0.0)) fail("min_point_range must be >= 0");
    if (dbscan_eps > 2.0 * max_line_gap) fail("dbscan_eps must not exceed 2 * max_line_gap");
  }
};

/// One sightline: the ray through a detection's bbox center.
struct Observation {
  std::size_t detection = 0;  // index into the detection list
  std::int64_t frame_id = 0;
  ObjectClass cls = ObjectClass::kTrafficLight;
  Ray3 ray;
};

struct LinePairClosest {
  EcefPoint midpoint;
  double gap = 0.0;  // length of the mutual perpendicular
  double s = 0.0;    // parameter of the closest point on the first line
  double t = 0.0;    // ... and on the second
};

/// Midpoint of the common perpendicular of two infinite lines.
/// std::nullopt when the lines are within `min_angle_rad` of parallel.
inline std::optional<LinePairClosest> closest_point_between_lines(const Ray3& a, const Ray3& b,
                                                                  double min_angle_rad) {
  const double cosang = a.direction.dot(b.direction);
  const double sinang = a.direction.cross(b.direction).norm();
  if (std::atan2(sinang, std::abs(cosang)) < min_angle_rad) return std::nullopt;
  const Vec3 w0 = a.origin - b.origin;
  const double d = a.direction.dot(w0);
  const double e = b.direction.dot(w0);
  const double denom = 1.0 - cosang * cosang;
  LinePairClosest out;
  out.s = (cosang * e - d) / denom;
  out.t = (e - cosang * d) / denom;
  const EcefPoint pa = a.at(out.s);
  const EcefPoint pb = b.at(out.t);
  out.midpoint = 0.5 * (pa + pb);
  out.gap = (pa - pb).norm();
  return out;
}

struct CandidatePoint {
  EcefPoint position;
  std::size_t first = 0;   // observation indices, first < second
  std::size_t second = 0;
  double gap = 0.0;
};

constexpr std::size_t class_index(ObjectClass c) { return c == ObjectClass::kTrafficLight ? 0 : 1; }
inline constexpr std::array<ObjectClass, 2> kAllClasses{ObjectClass::kTrafficLight,
                                                         ObjectClass::kTrafficSign};

using CandidatesByClass = std::array<std::vector<CandidatePoint>, 2>;

/// All same-class sightline pairs that pass close to each other at least
/// `min_point_range` in front of both cameras. Pairs from the same frame are
/// skipped: they share (or nearly share) an origin and meet at the camera
/// rather than at an object. The range floor removes a sightline grazing a
/// later camera center, which otherwise meets every ray of that frame there.
/// Output is ordered by (first, second).
inline CandidatesByClass generate_candidates(std::span<const Observation> obs,
                                             const TriangulationConfig& cfg) {
  const double min_angle = cfg.min_ray_angle_deg * kDegToRad;
  CandidatesByClass out;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (std::size_t j = i + 1; j < obs.size(); ++j) {
      if (obs[i].cls != obs[j].cls || obs[i].frame_id == obs[j].frame_id) continue;
      const auto c = closest_point_between_lines(obs[i].ray, obs[j].ray, min_angle);
      if (!c || c->gap > cfg.max_line_gap || !(c->s >= cfg.min_point_range) ||
          !(c->t >= cfg.min_point_range) || !(c->s > 0.0) || !(c->t > 0.0)) continue;
      out[class_index(obs[i].cls)].push_back({c->midpoint, i, j, c->gap});
    }
  }
  return out;
}

struct LocalizedCenter {
  ObjectClass cls = ObjectClass::kTrafficLight;
  EcefPoint center = EcefPoint::Zero();
  std::size_t support = 0;                // cluster size (candidate count)
  std::vector<std::size_t> observations;  // contributing sightlines, ascending
};

struct LocalizationStats {
  std::size_t detections_in = 0;
  std::size_t detections_confident = 0;
  std::size_t skipped_no_pose = 0;
  std::size_t rays = 0;
  std::size_t candidates = 0;
  std::size_t clusters = 0;
  std::size_t noise = 0;
};

struct LocalizationResult {
  std::vector<Observation> observations;
  std::vector<LocalizedCenter> centers;  // lights first, then signs; cluster order within
  LocalizationStats stats;
};

/// Builds sightlines from confident detections using interpolated poses.
inline std::vector<Observation> build_observations(std::span<const Detection2D> detections,
                                                   const PoseTrack& poses, const CameraRig& rig,
                                                   const TriangulationConfig& cfg,
                                                   LocalizationStats* stats = nullptr) {
  std::vector<Observation> out;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const auto& d = detections[i];
    if (d.confidence < cfg.min_confidence) continue;
    if (stats) ++stats->detections_confident;
    if (!poses.covers(d.timestamp)) {
      if (stats) ++stats->skipped_no_pose;
      continue;
    }
    const auto& cam = rig.at(d.camera_id);
    out.push_back({i, d.frame_id, d.cls, pixel_to_ray(cam, poses.at(d.timestamp), d.bbox.center())});
  }
  if (stats) stats->rays = out.size();
  return out;
}

inline LocalizationResult localize_centers(std::span<const Detection2D> detections,
                                           const PoseTrack& poses, const CameraRig& rig,
                                           const TriangulationConfig& cfg) {
  cfg.validate();
  const double travel = poses.travel_distance();
  if (travel < cfg.min_travel) {
    throw Error(ErrorCode::kSequenceTooShort,
                "ego travel " + std::to_string(travel) + " m is below the minimum of " +
                    std::to_string(cfg.min_travel) + " m");
  }

  LocalizationResult result;
  result.stats.detections_in = detections.size();
  result.observations = build_observations(detections, poses, rig, cfg, &result.stats);

  const auto candidates = generate_candidates(result.observations, cfg);
  for (const ObjectClass cls : kAllClasses) {
    const auto& cands = candidates[class_index(cls)];
    result.stats.candidates += cands.size();
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(cands.size());
    for (const auto& c : cands) pts.push_back(c.position);
    const Clustering clustering = dbscan(pts, cfg.dbscan_eps, cfg.dbscan_min_pts);
    result.stats.clusters += clustering.clusters.size();
    result.stats.noise += clustering.noise.size();

    for (const auto& members : clustering.clusters) {
      LocalizedCenter center;
      center.cls = cls;
      center.support = members.size();
      // Accumulate relative to one member to keep ECEF-magnitude sums exact-ish.
      const EcefPoint ref = pts[members.front()];
      Vec3 sum = Vec3::Zero();
      for (auto m : members) {
        sum += pts[m] - ref;
        center.observations.push_back(cands[m].first);
        center.observations.push_back(cands[m].second);
      }
      center.center = ref + sum / static_cast<double>(members.size());
      std::sort(center.observations.begin(), center.observations.end());
      center.observations.erase(std::unique(center.observations.begin(), center.observations.end()),
                                center.observations.end());
      result.centers.push_back(std::move(center));
    }
  }
  return result;
}

}  // namespace tmo3d
