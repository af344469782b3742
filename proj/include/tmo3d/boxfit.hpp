#pragma once

// Extent and yaw of localized objects.
//
// Extent: each 2D detection of an object is lifted onto the vertical plane
// through the object center that faces the camera; rays through the bbox
// corners (lights) or edge midpoints (signs) hit that plane, and the spread
// of the hits is one cross-section. Lights average the cross-sections and use
// width = depth; signs take the widest section and a fixed depth.
//
// Yaw: lights face opposite to the ego heading at the pose closest to a fixed
// distance in front of them; signs face back along the line of sight of the
// view with the widest cross-section.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "tmo3d/camera.hpp"
#include "tmo3d/error.hpp"
#include "tmo3d/geo.hpp"
#include "tmo3d/object.hpp"
#include "tmo3d/triangulate.hpp"

namespace tmo3d {

struct CrossSection {
  double width = 0.0;
  double height = 0.0;
  std::int64_t frame_id = 0;
  Vec3 line_of_sight = Vec3::UnitX();  // unit, camera -> center (ECEF)
};

enum class SectionMode { kCorners, kEdgeMidpoints };

inline SectionMode section_mode_for(ObjectClass cls) {
  return cls == ObjectClass::kTrafficLight ? SectionMode::kCorners : SectionMode::kEdgeMidpoints;
}

/// std::nullopt signals a degenerate view (line of sight within
/// `degenerate_angle_deg` of vertical, or the center behind the camera).
inline std::optional<CrossSection> cross_section(const EcefPoint& center, const GeoPose& pose,
                                                 const CameraModel& cam, const BBox2D& bbox,
                                                 SectionMode mode, std::int64_t frame_id = 0,
                                                 double degenerate_angle_deg = 5.0) {
  if (!bbox.valid()) throw Error(ErrorCode::kValidation, "degenerate bounding box");
  if (!(to_camera_frame(cam, pose, center).z() > 0.0)) return std::nullopt;

  const LocalFrame frame = LocalFrame::at(center);
  const EcefPoint origin = cam.center(pose);
  const Vec3 los = (center - origin).normalized();
  const Vec3 horizontal = frame.horizontal(los);
  if (horizontal.norm() < std::sin(degenerate_angle_deg * kDegToRad)) return std::nullopt;
  const Vec3 normal = horizontal.normalized();
  const Vec3 across = frame.up.cross(normal);

  std::array<Vec2, 4> pixels;
  if (mode == SectionMode::kCorners) {
    pixels = {Vec2(bbox.x_min, bbox.y_min), Vec2(bbox.x_max, bbox.y_min),
              Vec2(bbox.x_max, bbox.y_max), Vec2(bbox.x_min, bbox.y_max)};
  } else {
    const Vec2 c = bbox.center();
    pixels = {Vec2(bbox.x_min, c.y()), Vec2(bbox.x_max, c.y()), Vec2(c.x(), bbox.y_min),
              Vec2(c.x(), bbox.y_max)};
  }

  double u_lo = std::numeric_limits<double>::infinity(), u_hi = -u_lo;
  double v_lo = u_lo, v_hi = -u_lo;
  const double plane_offset = normal.dot(center - origin);
  for (const auto& px : pixels) {
    const Ray3 ray = pixel_to_ray(cam, pose, px);
    const double denom = normal.dot(ray.direction);
    if (!(denom > 1e-12)) return std::nullopt;
    const Vec3 rel = ray.at(plane_offset / denom) - center;
    const double u = across.dot(rel);
    const double v = frame.up.dot(rel);
    u_lo = std::min(u_lo, u);
    u_hi = std::max(u_hi, u);
    v_lo = std::min(v_lo, v);
    v_hi = std::max(v_hi, v);
  }
  return CrossSection{u_hi - u_lo, v_hi - v_lo, frame_id, los};
}

inline Extent estimate_extent_light(std::span<const CrossSection> sections) {
  if (sections.empty()) throw Error(ErrorCode::kNoObservations, "no cross-sections for light");
  double w = 0.0, h = 0.0;
  for (const auto& s : sections) {
    w += s.width;
    h += s.height;
  }
  const double n = static_cast<double>(sections.size());
  return {w / n, w / n, h / n};
}

inline Extent estimate_extent_sign(std::span<const CrossSection> sections, double sign_depth = 0.10) {
  if (sections.empty()) throw Error(ErrorCode::kNoObservations, "no cross-sections for sign");
  double w = 0.0, h = 0.0;
  for (const auto& s : sections) {
    w = std::max(w, s.width);
    h += s.height;
  }
  return {w, sign_depth, h / static_cast<double>(sections.size())};
}

/// Yaw facing against the ego heading at the pose whose horizontal distance to
/// the light is closest to `target_distance`, among poses with the light ahead.
/// Ties go to the earlier pose.
inline double estimate_orientation_light(const EcefPoint& center, std::span<const GeoPose> poses,
                                         double target_distance = 10.0) {
  const LocalFrame frame = LocalFrame::at(center);
  const GeoPose* best = nullptr;
  double best_score = std::numeric_limits<double>::infinity();
  for (const auto& pose : poses) {
    if (!(to_vehicle_frame(center, pose).x() > 0.0)) continue;
    const double d = frame.horizontal(center - pose.position).norm();
    const double score = std::abs(d - target_distance);
    if (score < best_score) {
      best_score = score;
      best = &pose;
    }
  }
  if (!best) throw Error(ErrorCode::kNoValidPose, "light is never ahead of the vehicle");
  return wrap_angle(frame.heading_of(best->forward()) + std::numbers::pi);
}

/// Yaw facing back along the line of sight of the widest view (earliest frame
/// wins ties; equal frames keep list order).
inline double estimate_orientation_sign(const EcefPoint& center,
                                        std::span<const CrossSection> views) {
  if (views.empty()) throw Error(ErrorCode::kNoObservations, "no views for sign orientation");
  const CrossSection* best = &views.front();
  for (const auto& v : views.subspan(1)) {
    if (v.width > best->width || (v.width == best->width && v.frame_id < best->frame_id)) best = &v;
  }
  return LocalFrame::at(center).heading_of(-best->line_of_sight);
}

struct BoxFitConfig {
  double sign_depth = 0.10;                 // m
  double light_orientation_distance = 10.0;  // m
  double degenerate_view_deg = 5.0;

  void validate() const {
    if (!(sign_depth > 0.0)) throw Error(ErrorCode::kConfig, "sign_depth must be positive");
    if (!(light_orientation_distance > 0.0)) {
      throw Error(ErrorCode::kConfig, "light_orientation_distance must be positive");
    }
    if (!(degenerate_view_deg > 0.0 && degenerate_view_deg < 90.0)) {
      throw Error(ErrorCode::kConfig, "degenerate_view_deg must be in (0, 90)");
    }
  }
};

/// Per-key majority vote; ties go to the lexicographically smallest value.
inline Attributes majority_attributes(std::span<const Attributes> all) {
  std::map<std::string, std::map<std::string, std::size_t>> votes;
  for (const auto& attrs : all) {
    for (const auto& [k, v] : attrs) ++votes[k][v];
  }
  Attributes out;
  for (const auto& [k, counts] : votes) {
    const auto best = std::max_element(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
      return a.second < b.second;  // max_element keeps the first maximum
    });
    out.emplace(k, best->first);
  }
  return out;
}

/// Cross-sections of one localized object from the sightlines that formed it.
inline std::vector<CrossSection> object_sections(const LocalizedCenter& obj,
                                                 std::span<const Observation> observations,
                                                 std::span<const Detection2D> detections,
                                                 const PoseTrack& poses, const CameraRig& rig,
                                                 const BoxFitConfig& cfg) {
  std::vector<CrossSection> sections;
  for (auto oi : obj.observations) {
    const auto& d = detections[observations[oi].detection];
    auto s = cross_section(obj.center, poses.at(d.timestamp), rig.at(d.camera_id), d.bbox,
                           section_mode_for(obj.cls), d.frame_id, cfg.degenerate_view_deg);
    if (s) sections.push_back(*s);
  }
  return sections;
}

/// Full box for one localized center; std::nullopt when every view is degenerate.
inline std::optional<ObjectBox3D> fit_box(const LocalizedCenter& obj, std::int64_t object_id,
                                          std::span<const Observation> observations,
                                          std::span<const Detection2D> detections,
                                          const PoseTrack& poses, const CameraRig& rig,
                                          const BoxFitConfig& cfg) {
  const auto sections = object_sections(obj, observations, detections, poses, rig, cfg);
  if (sections.empty()) return std::nullopt;

  ObjectBox3D box;
  box.object_id = object_id;
  box.cls = obj.cls;
  box.center = obj.center;
  box.support = static_cast<std::int64_t>(obj.support);
  if (obj.cls == ObjectClass::kTrafficLight) {
    box.extent = estimate_extent_light(sections);
    try {
      box.yaw = estimate_orientation_light(obj.center, poses.poses(), cfg.light_orientation_distance);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoValidPose) throw;
      box.yaw = estimate_orientation_sign(obj.center, sections);
    }
  } else {
    box.extent = estimate_extent_sign(sections, cfg.sign_depth);
    box.yaw = estimate_orientation_sign(obj.center, sections);
  }

  std::vector<Attributes> attrs;
  attrs.reserve(obj.observations.size());
  for (auto oi : obj.observations) attrs.push_back(detections[observations[oi].detection].attributes);
  box.attributes = majority_attributes(attrs);
  return box;
}

}  // namespace tmo3d
