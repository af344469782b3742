#pragma once

// Per-frame annotations: the static ECEF map re-expressed in each frame's
// vehicle coordinates, range-limited, with per-camera 2D projections.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tmo3d/camera.hpp"
#include "tmo3d/geo.hpp"
#include "tmo3d/object.hpp"
#include "tmo3d/refine.hpp"
#include "tmo3d/triangulate.hpp"

namespace tmo3d {

struct AnnotatedObject {
  std::int64_t object_id = 0;
  ObjectClass cls = ObjectClass::kTrafficLight;
  Vec3 center = Vec3::Zero();  // vehicle frame [m]
  Extent extent;
  double yaw = 0.0;  // facing direction relative to the vehicle x axis, CCW
  Attributes attributes;
  std::map<std::string, BBox2D> projections;  // camera id -> clipped image box
};

struct FrameAnnotation {
  std::int64_t frame_id = 0;
  double timestamp = 0.0;
  std::vector<AnnotatedObject> objects;  // ascending object_id
};

struct ExportConfig {
  double range_lateral = 10.0;       // |y| limit [m]
  double range_longitudinal = 200.0;  // x in [0, limit] [m]
  double attribute_min_iou = 0.3;     // detection/projection overlap for per-frame attributes

  void validate() const {
    if (!(range_lateral > 0.0) || !(range_longitudinal > 0.0)) {
      throw Error(ErrorCode::kConfig, "export ranges must be positive");
    }
    if (!(attribute_min_iou >= 0.0 && attribute_min_iou <= 1.0)) {
      throw Error(ErrorCode::kConfig, "attribute_min_iou must be in [0, 1]");
    }
  }
};

inline bool in_export_range(const Vec3& v, const ExportConfig& cfg) {
  return std::abs(v.y()) <= cfg.range_lateral && v.x() >= 0.0 && v.x() <= cfg.range_longitudinal;
}

/// Annotates one frame. Per-frame attributes (e.g. light state) come from the
/// best-overlapping detection of that frame when one overlaps enough;
/// otherwise the object's map attributes are used.
inline FrameAnnotation annotate_frame(std::span<const ObjectBox3D> map, std::int64_t frame_id,
                                      const GeoPose& pose, const CameraRig& rig,
                                      const ExportConfig& cfg,
                                      std::span<const Detection2D> frame_detections = {}) {
  FrameAnnotation ann;
  ann.frame_id = frame_id;
  ann.timestamp = pose.timestamp;
  for (const auto& box : map) {
    const Vec3 center = to_vehicle_frame(box.center, pose);
    if (!in_export_range(center, cfg)) continue;

    AnnotatedObject obj;
    obj.object_id = box.object_id;
    obj.cls = box.cls;
    obj.center = center;
    obj.extent = box.extent;
    const Vec3 facing = pose.orientation.conjugate() * box.facing();
    obj.yaw = std::atan2(facing.y(), facing.x());
    obj.attributes = box.attributes;

    const Detection2D* best_det = nullptr;
    double best_iou = cfg.attribute_min_iou;
    for (const auto& cam : rig.cameras()) {
      const auto projected = project_box(cam, pose, box);
      if (!projected) continue;
      obj.projections.emplace(cam.camera_id, *projected);
      for (const auto& d : frame_detections) {
        if (d.camera_id != cam.camera_id || d.cls != box.cls) continue;
        const double iou = iou2d(*projected, d.bbox);
        if (iou >= best_iou && (!best_det || iou > best_iou)) {
          best_iou = iou;
          best_det = &d;
        }
      }
    }
    if (best_det) {
      for (const auto& [k, v] : best_det->attributes) obj.attributes[k] = v;
    }
    ann.objects.push_back(std::move(obj));
  }
  std::sort(ann.objects.begin(), ann.objects.end(),
            [](const AnnotatedObject& a, const AnnotatedObject& b) { return a.object_id < b.object_id; });
  return ann;
}

}  // namespace tmo3d
