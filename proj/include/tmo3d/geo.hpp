#pragma once

// WGS84 geodesy, local ENU frames, and ego poses.
//
// Conventions used throughout tmo3d:
//   * ECEF is the global frame; the static object map lives there.
//   * GeoPose::orientation maps vehicle-frame vectors to ECEF
//     (v_ecef = q * v_vehicle).
//   * Vehicle frame: x forward, y left, z up, origin at the INS reference point.
//   * Headings/yaws are measured in the local ENU tangent plane,
//     counter-clockwise from east (east = 0, north = +pi/2).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "tmo3d/error.hpp"

namespace tmo3d {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

/// Cartesian point in the Earth-centered Earth-fixed frame [m].
using EcefPoint = Eigen::Vector3d;

namespace wgs84 {
inline constexpr double kSemiMajor = 6378137.0;
inline constexpr double kFlattening = 1.0 / 298.257223563;
inline constexpr double kSemiMinor = kSemiMajor * (1.0 - kFlattening);
inline constexpr double kEccentricitySq = kFlattening * (2.0 - kFlattening);
}  // namespace wgs84

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double rad) {
  double r = std::remainder(rad, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

struct GeodeticPoint {
  double latitude = 0.0;   // degrees
  double longitude = 0.0;  // degrees
  double altitude = 0.0;   // meters above the ellipsoid

  bool valid() const {
    return std::isfinite(latitude) && std::isfinite(longitude) && std::isfinite(altitude) &&
           latitude >= -90.0 && latitude <= 90.0 && longitude >= -180.0 && longitude <= 180.0;
  }
};

inline void validate(const GeodeticPoint& p) {
  if (!p.valid()) {
    throw Error(ErrorCode::kValidation,
                "geodetic point out of range (lat " + std::to_string(p.latitude) + ", lon " +
                    std::to_string(p.longitude) + ")");
  }
}

/// Sanity band for points on or near the Earth's surface.
inline bool plausible_surface_point(const EcefPoint& p) {
  const double n = p.norm();
  return p.allFinite() && n >= 6.2e6 && n <= 6.6e6;
}

inline EcefPoint wgs84_to_ecef(const GeodeticPoint& g) {
  using namespace wgs84;
  const double lat = g.latitude * kDegToRad;
  const double lon = g.longitude * kDegToRad;
  const double s = std::sin(lat);
  const double c = std::cos(lat);
  const double n = kSemiMajor / std::sqrt(1.0 - kEccentricitySq * s * s);
  return {(n + g.altitude) * c * std::cos(lon), (n + g.altitude) * c * std::sin(lon),
          (n * (1.0 - kEccentricitySq) + g.altitude) * s};
}

/// Iterative (Bowring-style fixed point) inverse; converges to 1e-12 rad.
inline GeodeticPoint ecef_to_wgs84(const EcefPoint& p) {
  using namespace wgs84;
  const double rho = std::hypot(p.x(), p.y());
  const double lon = std::atan2(p.y(), p.x());
  double lat = std::atan2(p.z(), rho * (1.0 - kEccentricitySq));
  for (int i = 0; i < 30; ++i) {
    const double s = std::sin(lat);
    const double n = kSemiMajor / std::sqrt(1.0 - kEccentricitySq * s * s);
    const double next = std::atan2(p.z() + kEccentricitySq * n * s, rho);
    const bool done = std::abs(next - lat) < 1e-12;
    lat = next;
    if (done) break;
  }
  const double s = std::sin(lat);
  const double c = std::cos(lat);
  // Projection onto the normal; stable at both the equator and the poles.
  const double alt = rho * c + p.z() * s - kSemiMajor * std::sqrt(1.0 - kEccentricitySq * s * s);
  return {lat * kRadToDeg, lon * kRadToDeg, alt};
}

/// Rotation taking ECEF vectors into the ENU frame at `origin`; rows are e, n, u.
inline Mat3 ecef_to_enu_rotation(const GeodeticPoint& origin) {
  const double lat = origin.latitude * kDegToRad;
  const double lon = origin.longitude * kDegToRad;
  const double sl = std::sin(lat), cl = std::cos(lat);
  const double so = std::sin(lon), co = std::cos(lon);
  Mat3 r;
  r << -so, co, 0.0,
       -sl * co, -sl * so, cl,
        cl * co, cl * so, sl;
  return r;
}

inline Vec3 ecef_to_enu(const EcefPoint& p, const GeodeticPoint& origin) {
  return ecef_to_enu_rotation(origin) * (p - wgs84_to_ecef(origin));
}

inline EcefPoint enu_to_ecef(const Vec3& enu, const GeodeticPoint& origin) {
  return wgs84_to_ecef(origin) + ecef_to_enu_rotation(origin).transpose() * enu;
}

/// ENU axes (expressed in ECEF) of the tangent plane at an arbitrary ECEF point.
struct LocalFrame {
  Vec3 east;
  Vec3 north;
  Vec3 up;

  static LocalFrame at(const EcefPoint& p) {
    const Mat3 r = ecef_to_enu_rotation(ecef_to_wgs84(p));
    return {r.row(0).transpose(), r.row(1).transpose(), r.row(2).transpose()};
  }

  /// Heading (CCW from east) of the horizontal part of `dir`.
  double heading_of(const Vec3& dir) const { return std::atan2(dir.dot(north), dir.dot(east)); }

  Vec3 direction(double heading) const {
    return std::cos(heading) * east + std::sin(heading) * north;
  }

  Vec3 horizontal(const Vec3& v) const { return v - v.dot(up) * up; }
};

struct GeoPose {
  double timestamp = 0.0;  // seconds
  EcefPoint position = EcefPoint::Zero();
  Quat orientation = Quat::Identity();  // vehicle -> ECEF

  Mat3 rotation() const { return orientation.toRotationMatrix(); }
  Vec3 forward() const { return orientation * Vec3::UnitX(); }
  Vec3 up() const { return orientation * Vec3::UnitZ(); }
};

/// Expresses an ECEF point in the vehicle frame of `pose`.
inline Vec3 to_vehicle_frame(const EcefPoint& p, const GeoPose& pose) {
  return pose.orientation.conjugate() * (p - pose.position);
}

inline EcefPoint from_vehicle_frame(const Vec3& v, const GeoPose& pose) {
  return pose.position + pose.orientation * v;
}

/// Level vehicle pose at `position` whose x axis points along the horizontal
/// projection of `forward` (ECEF) and whose z axis is the local ellipsoidal up.
inline GeoPose pose_from_forward(double timestamp, const EcefPoint& position, const Vec3& forward) {
  const LocalFrame frame = LocalFrame::at(position);
  Vec3 x = frame.horizontal(forward);
  if (x.norm() < 1e-12) {
    throw Error(ErrorCode::kValidation, "forward direction is vertical");
  }
  x.normalize();
  const Vec3 z = frame.up;
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  GeoPose pose;
  pose.timestamp = timestamp;
  pose.position = position;
  pose.orientation = Quat(r).normalized();
  return pose;
}

inline GeoPose pose_from_heading(double timestamp, const EcefPoint& position, double heading) {
  return pose_from_forward(timestamp, position, LocalFrame::at(position).direction(heading));
}

/// Linear position / slerp orientation interpolation between bracketing poses.
inline GeoPose interpolate_pose(const GeoPose& a, const GeoPose& b, double t) {
  if (!(t >= a.timestamp && t <= b.timestamp)) {
    throw Error(ErrorCode::kOutOfRange, "t=" + std::to_string(t) + " outside [" +
                                            std::to_string(a.timestamp) + ", " +
                                            std::to_string(b.timestamp) + "]");
  }
  if (t == a.timestamp) return a;
  if (t == b.timestamp) return b;
  const double u = (t - a.timestamp) / (b.timestamp - a.timestamp);
  GeoPose out;
  out.timestamp = t;
  out.position = a.position + u * (b.position - a.position);
  out.orientation = a.orientation.slerp(u, b.orientation).normalized();
  return out;
}

/// Applies a global rigid motion to a pose (used by equivariance checks and tooling).
inline GeoPose transformed(const GeoPose& pose, const Eigen::Isometry3d& motion) {
  GeoPose out = pose;
  out.position = motion * pose.position;
  out.orientation = (Quat(motion.rotation()) * pose.orientation).normalized();
  return out;
}

/// Time-ordered pose stream with interpolated lookup.
class PoseTrack {
 public:
  PoseTrack() = default;

  explicit PoseTrack(std::vector<GeoPose> poses) : poses_(std::move(poses)) {
    for (std::size_t i = 0; i < poses_.size(); ++i) {
      const auto& p = poses_[i];
      if (std::abs(p.orientation.norm() - 1.0) > 1e-9) {
        throw Error(ErrorCode::kValidation,
                    "pose " + std::to_string(i) + ": quaternion is not unit length");
      }
      if (i > 0 && !(p.timestamp > poses_[i - 1].timestamp)) {
        throw Error(ErrorCode::kValidation,
                    "pose " + std::to_string(i) + ": timestamps must be strictly increasing");
      }
    }
  }

  std::span<const GeoPose> poses() const { return poses_; }
  std::size_t size() const { return poses_.size(); }
  bool empty() const { return poses_.empty(); }

  bool covers(double t) const {
    return !poses_.empty() && t >= poses_.front().timestamp && t <= poses_.back().timestamp;
  }

  GeoPose at(double t) const {
    if (!covers(t)) {
      throw Error(ErrorCode::kOutOfRange,
                  "timestamp " + std::to_string(t) + " not covered by the pose stream");
    }
    auto it = std::lower_bound(poses_.begin(), poses_.end(), t,
                               [](const GeoPose& p, double v) { return p.timestamp < v; });
    if (it->timestamp == t) return *it;
    return interpolate_pose(*(it - 1), *it, t);
  }

  /// Path length along the position samples [m].
  double travel_distance() const {
    double d = 0.0;
    for (std::size_t i = 1; i < poses_.size(); ++i) {
      d += (poses_[i].position - poses_[i - 1].position).norm();
    }
    return d;
  }

  PoseTrack transformed(const Eigen::Isometry3d& motion) const {
    std::vector<GeoPose> out;
    out.reserve(poses_.size());
    for (const auto& p : poses_) out.push_back(tmo3d::transformed(p, motion));
    return PoseTrack(std::move(out));
  }

 private:
  std::vector<GeoPose> poses_;
};

}  // namespace tmo3d
