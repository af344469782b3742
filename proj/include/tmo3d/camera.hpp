#pragma once

// Pinhole camera with optional radial distortion (k1, k2).
//
// Camera frame: z along the optical axis, x right, y down (image convention).
// The extrinsic maps camera-frame points into the vehicle frame.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "tmo3d/error.hpp"
#include "tmo3d/geo.hpp"
#include "tmo3d/object.hpp"

namespace tmo3d {

struct BBox2D {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  bool valid() const {
    return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
           std::isfinite(y_max) && x_min < x_max && y_min < y_max;
  }
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  Vec2 center() const { return {(x_min + x_max) / 2.0, (y_min + y_max) / 2.0}; }
  bool contains(const Vec2& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
  }

  bool operator==(const BBox2D&) const = default;
};

struct Ray3 {
  EcefPoint origin = EcefPoint::Zero();
  Vec3 direction = Vec3::UnitX();  // unit length

  EcefPoint at(double t) const { return origin + t * direction; }
};

struct CameraModel {
  std::string camera_id;
  int width = 0;
  int height = 0;
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  Eigen::Isometry3d camera_to_vehicle = Eigen::Isometry3d::Identity();

  bool has_distortion() const { return k1 != 0.0 || k2 != 0.0; }

  bool in_bounds(const Vec2& px) const {
    return px.x() >= 0.0 && px.x() <= width && px.y() >= 0.0 && px.y() <= height;
  }

  /// Camera center in ECEF for a given vehicle pose.
  EcefPoint center(const GeoPose& pose) const {
    return from_vehicle_frame(camera_to_vehicle.translation(), pose);
  }

  /// Rotation taking camera-frame vectors into ECEF.
  Mat3 rotation_to_ecef(const GeoPose& pose) const {
    return pose.rotation() * camera_to_vehicle.rotation();
  }

  Vec2 distort(const Vec2& n) const {
    const double r2 = n.squaredNorm();
    return n * (1.0 + k1 * r2 + k2 * r2 * r2);
  }

  Vec2 undistort(const Vec2& d) const {
    if (!has_distortion()) return d;
    Vec2 n = d;
    for (int i = 0; i < 50; ++i) {
      const double r2 = n.squaredNorm();
      const Vec2 next = d / (1.0 + k1 * r2 + k2 * r2 * r2);
      if ((next - n).norm() < 1e-15) {
        n = next;
        break;
      }
      n = next;
    }
    return n;
  }

  /// Pixel of a camera-frame point with positive depth (no bounds check).
  Vec2 pixel_of(const Vec3& p_cam) const {
    const Vec2 d = distort(Vec2(p_cam.x() / p_cam.z(), p_cam.y() / p_cam.z()));
    return {fx * d.x() + cx, fy * d.y() + cy};
  }

  /// Unit camera-frame direction through a pixel.
  Vec3 bearing(const Vec2& px) const {
    const Vec2 n = undistort(Vec2((px.x() - cx) / fx, (px.y() - cy) / fy));
    return Vec3(n.x(), n.y(), 1.0).normalized();
  }
};

inline void validate(const CameraModel& cam) {
  const auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kValidation, "camera '" + cam.camera_id + "': " + what);
  };
  if (cam.camera_id.empty()) fail("empty camera id");
  if (cam.width <= 0 || cam.height <= 0) fail("resolution must be positive");
  if (!(cam.fx > 0.0) || !(cam.fy > 0.0)) fail("fx and fy must be positive");
  if (!(cam.cx > 0.0 && cam.cx < cam.width)) fail("cx must lie inside the image");
  if (!(cam.cy > 0.0 && cam.cy < cam.height)) fail("cy must lie inside the image");
  const Mat3 r = cam.camera_to_vehicle.rotation();
  if (!((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-6) ||
      !(std::abs(r.determinant() - 1.0) < 1e-6)) {
    fail("extrinsic is not a rigid transform");
  }
}

/// Back-projects a pixel into an ECEF ray starting at the camera center.
inline Ray3 pixel_to_ray(const CameraModel& cam, const GeoPose& pose, const Vec2& px) {
  if (!cam.in_bounds(px)) {
    throw Error(ErrorCode::kDomain, "pixel (" + std::to_string(px.x()) + ", " +
                                        std::to_string(px.y()) + ") outside camera '" +
                                        cam.camera_id + "'");
  }
  return {cam.center(pose), (cam.rotation_to_ecef(pose) * cam.bearing(px)).normalized()};
}

struct Projection {
  enum class Status { kVisible, kBehind, kOutOfImage };
  Status status = Status::kBehind;
  Vec2 pixel = Vec2::Zero();  // unclipped; meaningless when kBehind

  bool visible() const { return status == Status::kVisible; }
};

inline Vec3 to_camera_frame(const CameraModel& cam, const GeoPose& pose, const EcefPoint& p) {
  return cam.rotation_to_ecef(pose).transpose() * (p - cam.center(pose));
}

inline Projection project(const CameraModel& cam, const GeoPose& pose, const EcefPoint& p) {
  const Vec3 pc = to_camera_frame(cam, pose, p);
  if (!(pc.z() > 0.0)) return {Projection::Status::kBehind, Vec2::Zero()};
  const Vec2 px = cam.pixel_of(pc);
  return {cam.in_bounds(px) ? Projection::Status::kVisible : Projection::Status::kOutOfImage, px};
}

/// Image-space hull of a 3D box's corners, clipped to the image.
///
/// Edges crossing the near plane are cut there so partially-behind boxes still
/// produce a hull; std::nullopt when nothing in front projects to a positive area.
inline std::optional<BBox2D> project_box(const CameraModel& cam, const GeoPose& pose,
                                         const ObjectBox3D& box) {
  constexpr double kNear = 1e-3;
  const auto corners = box.corners();
  std::array<Vec3, 8> pc;
  for (int i = 0; i < 8; ++i) pc[i] = to_camera_frame(cam, pose, corners[i]);

  std::vector<Vec3> front;
  front.reserve(20);
  for (const auto& c : pc) {
    if (c.z() >= kNear) front.push_back(c);
  }
  if (front.empty()) return std::nullopt;
  if (front.size() < 8) {
    // Corner indices differ in exactly one bit along each edge.
    for (int i = 0; i < 8; ++i) {
      for (int bit = 1; bit < 8; bit <<= 1) {
        const int j = i | bit;
        if (j == i) continue;
        const Vec3& a = pc[i];
        const Vec3& b = pc[j];
        if ((a.z() >= kNear) != (b.z() >= kNear)) {
          const double t = (kNear - a.z()) / (b.z() - a.z());
          front.push_back(a + t * (b - a));
        }
      }
    }
  }

  BBox2D hull{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& c : front) {
    const Vec2 px = cam.pixel_of(c);
    hull.x_min = std::min(hull.x_min, px.x());
    hull.y_min = std::min(hull.y_min, px.y());
    hull.x_max = std::max(hull.x_max, px.x());
    hull.y_max = std::max(hull.y_max, px.y());
  }
  hull.x_min = std::clamp(hull.x_min, 0.0, static_cast<double>(cam.width));
  hull.x_max = std::clamp(hull.x_max, 0.0, static_cast<double>(cam.width));
  hull.y_min = std::clamp(hull.y_min, 0.0, static_cast<double>(cam.height));
  hull.y_max = std::clamp(hull.y_max, 0.0, static_cast<double>(cam.height));
  if (!hull.valid()) return std::nullopt;
  return hull;
}

/// Set of cameras keyed by id, in a stable order.
class CameraRig {
 public:
  CameraRig() = default;
  explicit CameraRig(std::vector<CameraModel> cams) : cams_(std::move(cams)) {
    std::sort(cams_.begin(), cams_.end(),
              [](const CameraModel& a, const CameraModel& b) { return a.camera_id < b.camera_id; });
    for (std::size_t i = 0; i < cams_.size(); ++i) {
      validate(cams_[i]);
      if (i > 0 && cams_[i].camera_id == cams_[i - 1].camera_id) {
        throw Error(ErrorCode::kValidation, "duplicate camera id '" + cams_[i].camera_id + "'");
      }
    }
  }

  const std::vector<CameraModel>& cameras() const { return cams_; }

  const CameraModel* find(std::string_view id) const {
    auto it = std::lower_bound(cams_.begin(), cams_.end(), id,
                               [](const CameraModel& c, std::string_view v) { return c.camera_id < v; });
    return (it != cams_.end() && it->camera_id == id) ? &*it : nullptr;
  }

  const CameraModel& at(std::string_view id) const {
    if (const auto* c = find(id)) return *c;
    throw Error(ErrorCode::kValidation, "unknown camera id '" + std::string(id) + "'");
  }

 private:
  std::vector<CameraModel> cams_;
};

}  // namespace tmo3d
