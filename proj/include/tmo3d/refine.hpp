#pragma once

// False-positive removal. Triangulation errors can leave extra boxes along the
// sightlines of a true object. Each box is scored by how well its image
// projection overlaps the original detections; boxes that stay nearly
// collinear (as seen from the cameras) over several frames are linked, and a
// box survives only if it scores best among the boxes it is linked to.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tmo3d/camera.hpp"
#include "tmo3d/dbscan.hpp"
#include "tmo3d/error.hpp"
#include "tmo3d/object.hpp"
#include "tmo3d/sequence.hpp"

namespace tmo3d {

inline double iou2d(const BBox2D& a, const BBox2D& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

struct IoUScore {
  std::int64_t object_id = 0;
  double mean_iou = 0.0;
  std::size_t frames_scored = 0;
};

struct RefineConfig {
  double los_angle_threshold_deg = 0.275;
  std::size_t min_shared_frames = 5;
  std::size_t min_frames_scored = 3;
  double min_confidence = 0.7;   // detections used as 2D evidence
  double max_scoring_range = 200.0;  // m from the vehicle

  void validate() const {
    if (!(los_angle_threshold_deg > 0.0)) {
      throw Error(ErrorCode::kConfig, "los_angle_threshold_deg must be positive");
    }
    if (min_shared_frames < 1) throw Error(ErrorCode::kConfig, "min_shared_frames must be >= 1");
    if (!(max_scoring_range > 0.0)) {
      throw Error(ErrorCode::kConfig, "max_scoring_range must be positive");
    }
  }
};

/// Mean over frames (and cameras) where the box projects into the image of the
/// best IoU against a same-class detection in that image; 0 when none exists.
/// Frames where the box is behind the camera, outside the image, or beyond
/// `max_scoring_range` contribute nothing.
inline IoUScore mean_reprojection_iou(const ObjectBox3D& box, const Sequence& seq,
                                      const DetectionIndex& index, const RefineConfig& cfg) {
  IoUScore score{box.object_id, 0.0, 0};
  double sum = 0.0;
  for (const auto& frame : seq.frames) {
    if (!seq.poses.covers(frame.timestamp)) continue;
    const GeoPose pose = seq.poses.at(frame.timestamp);
    if ((box.center - pose.position).norm() > cfg.max_scoring_range) continue;
    for (const auto& cam_id : frame.cameras) {
      const CameraModel* cam = seq.rig.find(cam_id);
      if (!cam || !project(*cam, pose, box.center).visible()) continue;
      const auto projected = project_box(*cam, pose, box);
      if (!projected) continue;
      double best = 0.0;
      for (auto di : index.at(frame.frame_id, cam_id)) {
        const auto& d = seq.detections[di];
        if (d.cls != box.cls || d.confidence < cfg.min_confidence) continue;
        best = std::max(best, iou2d(*projected, d.bbox));
      }
      sum += best;
      ++score.frames_scored;
    }
  }
  if (score.frames_scored == 0) {
    throw Error(ErrorCode::kNeverVisible,
                "object " + std::to_string(box.object_id) + " never projects into a camera");
  }
  score.mean_iou = sum / static_cast<double>(score.frames_scored);
  return score;
}

namespace detail {

/// Calls fn(i, j) for every pair of boxes visible from `cam` whose sightlines
/// are within the threshold angle; i is the later index in visiting order.
template <class Fn>
void for_each_collinear_pair(std::span<const ObjectBox3D> boxes, const CameraModel& cam, const GeoPose& pose,
                             double threshold_deg, Fn&& fn) {
  const double cos_thr = std::cos(threshold_deg * kDegToRad);
  // Unit vectors closer than the threshold angle are within this chord, so
  // candidates share a direction cell or sit in an adjacent one.
  const double cell = 2.0 * std::sin(0.5 * threshold_deg * kDegToRad) * (1.0 + 1e-9);
  const EcefPoint origin = cam.center(pose);
  std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> cells;
  std::vector<Vec3> los(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (!project(cam, pose, boxes[i].center).visible()) continue;
    los[i] = (boxes[i].center - origin).normalized();
    const CellKey key{static_cast<std::int64_t>(std::floor(los[i].x() / cell)),
                      static_cast<std::int64_t>(std::floor(los[i].y() / cell)),
                      static_cast<std::int64_t>(std::floor(los[i].z() / cell))};
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = cells.find({key.x + dx, key.y + dy, key.z + dz});
          if (it == cells.end()) continue;
          for (auto j : it->second) {
            if (los[i].dot(los[j]) > cos_thr) fn(i, j);
          }
        }
      }
    }
    cells[key].push_back(i);
  }
}

}  // namespace detail

/// Full link graph: for each box, the boxes seen along nearly the same
/// sightline (from some camera) in at least `min_shared_frames` frames.
/// Neighbor lists are ascending. Quadratic in the number of linked pairs;
/// refine() itself only needs the cheaper dominance test below.
inline std::vector<std::vector<std::size_t>> link_by_los_angle(std::span<const ObjectBox3D> boxes,
                                                               const Sequence& seq, const RefineConfig& cfg) {
  const std::size_t n = boxes.size();
  std::unordered_map<std::uint64_t, std::size_t> shared;  // key a * n + b, a < b
  std::vector<std::uint64_t> linked;
  for (const auto& frame : seq.frames) {
    if (!seq.poses.covers(frame.timestamp)) continue;
    const GeoPose pose = seq.poses.at(frame.timestamp);
    linked.clear();
    for (const auto& cam_id : frame.cameras) {
      const CameraModel* cam = seq.rig.find(cam_id);
      if (!cam) continue;
      detail::for_each_collinear_pair(boxes, *cam, pose, cfg.los_angle_threshold_deg, [&](std::size_t i, std::size_t j) {
        linked.push_back(static_cast<std::uint64_t>(std::min(i, j)) * n + std::max(i, j));
      });
    }
    std::sort(linked.begin(), linked.end());
    linked.erase(std::unique(linked.begin(), linked.end()), linked.end());
    for (auto k : linked) ++shared[k];
  }
  std::vector<std::vector<std::size_t>> links(n);
  for (const auto& [k, count] : shared) {
    if (count < cfg.min_shared_frames) continue;
    const auto a = static_cast<std::size_t>(k / n), b = static_cast<std::size_t>(k % n);
    links[a].push_back(b);
    links[b].push_back(a);
  }
  for (auto& l : links) std::sort(l.begin(), l.end());
  return links;
}

/// A surviving box and the linked boxes it outranks (indices into the input).
struct SuppressionGroup {
  std::size_t kept = 0;
  std::vector<std::size_t> suppressed;
};

/// Pruning order: higher mean IoU, then larger support, then smaller object id.
/// Returns box indices, best first. `scores[i]` belongs to `boxes[i]`.
inline std::vector<std::size_t> rank_boxes(std::span<const ObjectBox3D> boxes, std::span<const IoUScore> scores) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (scores[x].mean_iou != scores[y].mean_iou) return scores[x].mean_iou > scores[y].mean_iou;
    if (boxes[x].support != boxes[y].support) return boxes[x].support > boxes[y].support;
    return boxes[x].object_id < boxes[y].object_id;
  });
  return order;
}

/// Groups from a precomputed link graph. A box survives when it outranks
/// every box it is linked to; any other box joins the group of the
/// best-ranked survivor it is linked to, if one exists. Only direct links
/// count, so two true objects that each share a sightline with one spurious
/// box do not displace each other. Groups are ordered by survivor rank.
inline std::vector<SuppressionGroup> group_from_links(std::span<const ObjectBox3D> boxes,
                                                      const std::vector<std::vector<std::size_t>>& links,
                                                      std::span<const IoUScore> scores) {
  const std::size_t n = boxes.size();
  const auto order = rank_boxes(boxes, scores);
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;

  std::vector<long> group_of(n, -1);
  std::vector<SuppressionGroup> groups;
  for (auto i : order) {
    if (std::any_of(links[i].begin(), links[i].end(), [&](std::size_t j) { return rank[j] < rank[i]; })) continue;
    group_of[i] = static_cast<long>(groups.size());
    groups.push_back({i, {}});
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (group_of[i] >= 0) continue;
    long best = -1;
    for (auto j : links[i]) {
      if (group_of[j] >= 0 && (best < 0 || group_of[j] < best)) best = group_of[j];
    }
    if (best >= 0) groups[static_cast<std::size_t>(best)].suppressed.push_back(i);
  }
  return groups;
}

/// Same result as group_from_links(boxes, link_by_los_angle(...), scores),
/// without building the full graph: a pair is only counted until its
/// lower-ranked box is known to be dominated, and suppressed boxes are then
/// attached by counting their links to survivors alone.
inline std::vector<SuppressionGroup> suppress_along_sightlines(std::span<const ObjectBox3D> boxes,
                                                               std::span<const IoUScore> scores,
                                                               const Sequence& seq, const RefineConfig& cfg) {
  const std::size_t n = boxes.size();
  const auto order = rank_boxes(boxes, scores);
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;

  // Pass 1: dominance. Keys are (lower-ranked, higher-ranked) pairs.
  std::vector<char> dominated(n, 0);
  std::unordered_map<std::uint64_t, std::size_t> shared;
  std::vector<std::uint64_t> linked;
  const auto visit_frames = [&](auto&& on_pair, auto&& end_frame) {
    for (const auto& frame : seq.frames) {
      if (!seq.poses.covers(frame.timestamp)) continue;
      const GeoPose pose = seq.poses.at(frame.timestamp);
      linked.clear();
      for (const auto& cam_id : frame.cameras) {
        const CameraModel* cam = seq.rig.find(cam_id);
        if (cam) detail::for_each_collinear_pair(boxes, *cam, pose, cfg.los_angle_threshold_deg, on_pair);
      }
      std::sort(linked.begin(), linked.end());
      linked.erase(std::unique(linked.begin(), linked.end()), linked.end());
      end_frame();
    }
  };
  visit_frames(
      [&](std::size_t i, std::size_t j) {
        const std::size_t lo = rank[i] > rank[j] ? i : j;
        const std::size_t hi = lo == i ? j : i;
        if (!dominated[lo]) linked.push_back(static_cast<std::uint64_t>(lo) * n + hi);
      },
      [&] {
        for (auto k : linked) {
          const auto lo = static_cast<std::size_t>(k / n);
          if (!dominated[lo] && ++shared[k] >= cfg.min_shared_frames) dominated[lo] = 1;
        }
      });

  std::vector<long> group_of(n, -1);
  std::vector<SuppressionGroup> groups;
  for (auto i : order) {
    if (dominated[i]) continue;
    group_of[i] = static_cast<long>(groups.size());
    groups.push_back({i, {}});
  }

  // Pass 2: attach each dominated box to its best linked survivor.
  shared.clear();
  visit_frames(
      [&](std::size_t i, std::size_t j) {
        if (dominated[i] && group_of[j] >= 0) linked.push_back(static_cast<std::uint64_t>(i) * n + j);
        if (dominated[j] && group_of[i] >= 0) linked.push_back(static_cast<std::uint64_t>(j) * n + i);
      },
      [&] {
        for (auto k : linked) ++shared[k];
      });
  std::vector<long> best(n, -1);
  for (const auto& [k, count] : shared) {
    if (count < cfg.min_shared_frames) continue;
    const auto i = static_cast<std::size_t>(k / n), s = static_cast<std::size_t>(k % n);
    if (best[i] < 0 || group_of[s] < best[i]) best[i] = group_of[s];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (best[i] >= 0) groups[static_cast<std::size_t>(best[i])].suppressed.push_back(i);
  }
  return groups;
}

struct RefineResult {
  std::vector<ObjectBox3D> survivors;       // ascending object id
  std::vector<IoUScore> scores;             // of every verifiable input box
  std::vector<std::int64_t> unverifiable;   // ids dropped before grouping
  std::vector<SuppressionGroup> groups;     // indices into the verifiable boxes
};

inline RefineResult refine(std::span<const ObjectBox3D> boxes, const Sequence& seq,
                           const RefineConfig& cfg) {
  cfg.validate();
  const DetectionIndex index(seq.detections);
  RefineResult result;
  std::vector<ObjectBox3D> kept;
  for (const auto& box : boxes) {
    IoUScore s;
    try {
      s = mean_reprojection_iou(box, seq, index, cfg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNeverVisible) throw;
      result.unverifiable.push_back(box.object_id);
      continue;
    }
    if (s.frames_scored < cfg.min_frames_scored) {
      result.unverifiable.push_back(box.object_id);
      continue;
    }
    kept.push_back(box);
    result.scores.push_back(s);
  }
  result.groups = suppress_along_sightlines(kept, result.scores, seq, cfg);
  for (const auto& g : result.groups) result.survivors.push_back(kept[g.kept]);
  std::sort(result.survivors.begin(), result.survivors.end(),
            [](const ObjectBox3D& a, const ObjectBox3D& b) { return a.object_id < b.object_id; });
  return result;
}

}  // namespace tmo3d
