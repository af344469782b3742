#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "tmo3d/error.hpp"
#include "tmo3d/geo.hpp"

namespace tmo3d {

enum class ObjectClass { kTrafficLight, kTrafficSign };

inline std::string_view to_string(ObjectClass c) {
  return c == ObjectClass::kTrafficLight ? "traffic_light" : "traffic_sign";
}

inline std::optional<ObjectClass> parse_object_class(std::string_view s) {
  if (s == "traffic_light") return ObjectClass::kTrafficLight;
  if (s == "traffic_sign") return ObjectClass::kTrafficSign;
  return std::nullopt;
}

/// Pass-through attributes (state, subtype, occlusion, text, ...). Ordered so
/// serialization is stable.
using Attributes = std::map<std::string, std::string>;

struct Extent {
  double width = 0.0;   // along the box's lateral axis
  double depth = 0.0;   // along the facing direction
  double height = 0.0;  // along local up

  bool valid() const { return width > 0.0 && depth > 0.0 && height > 0.0; }
};

/// A localized traffic light or sign in ECEF.
///
/// `yaw` is the heading (local ENU at the center, CCW from east) of the
/// direction the object's face points toward. The box axes are: depth along
/// the facing direction, width along up x facing, height along local up.
struct ObjectBox3D {
  std::int64_t object_id = 0;
  ObjectClass cls = ObjectClass::kTrafficLight;
  EcefPoint center = EcefPoint::Zero();
  Extent extent;
  double yaw = 0.0;
  Attributes attributes;
  std::int64_t support = 0;

  /// Columns: facing (depth) axis, lateral (width) axis, up; all in ECEF.
  Mat3 axes() const {
    const LocalFrame frame = LocalFrame::at(center);
    const Vec3 facing = frame.direction(yaw);
    Mat3 r;
    r.col(0) = facing;
    r.col(1) = frame.up.cross(facing);
    r.col(2) = frame.up;
    return r;
  }

  Vec3 facing() const { return LocalFrame::at(center).direction(yaw); }

  std::array<EcefPoint, 8> corners() const {
    const Mat3 r = axes();
    const Vec3 half(extent.depth / 2.0, extent.width / 2.0, extent.height / 2.0);
    std::array<EcefPoint, 8> out;
    for (int i = 0; i < 8; ++i) {
      const Vec3 s((i & 1) ? 1.0 : -1.0, (i & 2) ? 1.0 : -1.0, (i & 4) ? 1.0 : -1.0);
      out[i] = center + r * s.cwiseProduct(half);
    }
    return out;
  }
};

inline void validate(const ObjectBox3D& box) {
  if (!box.center.allFinite() || !box.extent.valid() || !std::isfinite(box.yaw)) {
    throw Error(ErrorCode::kValidation,
                "object " + std::to_string(box.object_id) + ": invalid center, extent or yaw");
  }
}

}  // namespace tmo3d
