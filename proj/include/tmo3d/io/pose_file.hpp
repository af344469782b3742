#pragma once

// Pose file: whitespace-separated text, one pose per line.
//
//   # tmo3d poses v1
//   # position: ecef              (or: geodetic -> latitude longitude altitude)
//   # orientation: vehicle_to_ecef  (or: ecef_to_vehicle)
//   <timestamp> <p1> <p2> <p3> <qw> <qx> <qy> <qz>
//
// Both header keys are mandatory: quaternion direction conventions are easy
// to mix up, so nothing is assumed. As a second guard, the vehicle z axis
// implied by each quaternion must point roughly along local up.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tmo3d/error.hpp"
#include "tmo3d/geo.hpp"
#include "tmo3d/io/text_lines.hpp"

namespace tmo3d::io {

enum class PositionForm { kEcef, kGeodetic };

/// Largest accepted angle between a pose's z axis and local up.
inline constexpr double kMaxUpTiltDeg = 45.0;

inline PoseTrack parse_poses(std::istream& in, const std::string& source = "poses") {
  std::optional<PositionForm> form;
  std::optional<bool> vehicle_to_ecef;
  std::vector<GeoPose> poses;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fail = [&](const std::string& what) {
      throw Error(ErrorCode::kParse, source + ":" + std::to_string(lineno) + ": " + what);
    };
    const std::string body = trim(line);
    if (body.empty()) continue;
    if (body[0] == '#') {
      const auto kv = header_entry(body);
      if (!kv) continue;
      if (kv->first == "position") {
        if (kv->second == "ecef") form = PositionForm::kEcef;
        else if (kv->second == "geodetic") form = PositionForm::kGeodetic;
        else fail("position must be 'ecef' or 'geodetic'");
      } else if (kv->first == "orientation") {
        if (kv->second == "vehicle_to_ecef") vehicle_to_ecef = true;
        else if (kv->second == "ecef_to_vehicle") vehicle_to_ecef = false;
        else fail("orientation must be 'vehicle_to_ecef' or 'ecef_to_vehicle'");
      }
      continue;
    }
    if (!form) fail("missing '# position:' header before the first record");
    if (!vehicle_to_ecef) fail("missing '# orientation:' header before the first record");

    const auto fields = split_ws(body);
    if (fields.size() != 8) fail("expected 8 fields, got " + std::to_string(fields.size()));
    double v[8];
    for (int i = 0; i < 8; ++i) {
      const auto x = parse_double(fields[static_cast<std::size_t>(i)]);
      if (!x) fail("field " + std::to_string(i + 1) + " is not a number");
      v[i] = *x;
    }

    GeoPose pose;
    pose.timestamp = v[0];
    if (*form == PositionForm::kGeodetic) {
      const GeodeticPoint g{v[1], v[2], v[3]};
      if (!g.valid()) fail("latitude/longitude out of range");
      pose.position = wgs84_to_ecef(g);
    } else {
      pose.position = EcefPoint(v[1], v[2], v[3]);
      if (!plausible_surface_point(pose.position)) fail("ECEF position is not near the Earth's surface");
    }
    Quat q(v[4], v[5], v[6], v[7]);
    if (std::abs(q.norm() - 1.0) > 1e-6) fail("quaternion is not unit length");
    q.normalize();
    pose.orientation = *vehicle_to_ecef ? q : q.conjugate();

    const double tilt = std::acos(std::clamp(pose.up().dot(LocalFrame::at(pose.position).up), -1.0, 1.0));
    if (tilt > kMaxUpTiltDeg * kDegToRad) {
      fail("vehicle z axis is " + std::to_string(tilt * kRadToDeg) +
           " deg from local up; check the orientation header");
    }
    if (!poses.empty() && !(pose.timestamp > poses.back().timestamp)) {
      fail("timestamps must be strictly increasing");
    }
    poses.push_back(pose);
  }
  return PoseTrack(std::move(poses));
}

inline PoseTrack read_poses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open pose file '" + path.string() + "'");
  return parse_poses(in, path.string());
}

inline std::string format_poses(const PoseTrack& track, PositionForm form = PositionForm::kEcef) {
  std::string out = "# tmo3d poses v1\n";
  out += form == PositionForm::kEcef ? "# position: ecef\n" : "# position: geodetic\n";
  out += "# orientation: vehicle_to_ecef\n";
  char buf[256];
  for (const auto& p : track.poses()) {
    const Quat& q = p.orientation;
    if (form == PositionForm::kEcef) {
      std::snprintf(buf, sizeof(buf), "%.6f %.6f %.6f %.6f %.12f %.12f %.12f %.12f\n", p.timestamp,
                    p.position.x(), p.position.y(), p.position.z(), q.w(), q.x(), q.y(), q.z());
    } else {
      const GeodeticPoint g = ecef_to_wgs84(p.position);
      std::snprintf(buf, sizeof(buf), "%.6f %.12f %.12f %.6f %.12f %.12f %.12f %.12f\n", p.timestamp,
                    g.latitude, g.longitude, g.altitude, q.w(), q.x(), q.y(), q.z());
    }
    out += buf;
  }
  return out;
}

}  // namespace tmo3d::io
