#pragma once

// Synthetic scenes with known ground truth: static boxes placed in a local ENU
// frame, an ego vehicle driving a piecewise-linear route, and 2D detections
// that are tight hulls of the projected box corners. Noise enters only through
// NoiseModel; every random draw is made whether or not its sigma is zero, so
// zero-noise runs are exact and the random stream does not depend on which
// noise terms are enabled.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tmo3d/camera.hpp"
#include "tmo3d/error.hpp"
#include "tmo3d/export.hpp"
#include "tmo3d/geo.hpp"
#include "tmo3d/object.hpp"
#include "tmo3d/sequence.hpp"
#include "tmo3d/triangulate.hpp"

namespace tmo3d::sim {

struct SimObject {
  ObjectClass cls = ObjectClass::kTrafficSign;
  Vec3 center_enu = Vec3::Zero();  // relative to SceneSpec::origin
  Extent extent;
  double yaw_deg = 0.0;  // facing direction in the origin's ENU frame, CCW from east
  Attributes attributes;
};

struct TrajectorySpec {
  std::vector<Vec2> waypoints;  // ENU east/north [m]
  double speed = 10.0;          // m/s
  double sample_rate = 30.0;    // Hz; one pose and one camera frame per sample
  double height = 0.0;          // INS reference height above the origin [m]
};

struct AttributeNoise {
  std::string key;
  double probability = 0.0;
  std::vector<std::string> values;  // replacement drawn among values != truth
};

struct NoiseModel {
  double pixel_sigma = 0.0;          // per bbox coordinate [px]
  double pose_position_sigma = 0.0;  // per ENU axis [m]
  double pose_yaw_sigma_deg = 0.0;
  double dropout = 0.0;  // per-detection drop probability
  std::optional<AttributeNoise> attribute_noise;
};

/// Phantom box on the sightline from one camera frame through a true object.
struct GhostSpec {
  std::size_t object = 0;
  std::int64_t frame = 0;  // sample index
  std::string camera;
  double depth_offset = 3.0;  // [m] beyond the true center
};

struct DetectorModel {
  double confidence = 0.9;
  double max_range = 200.0;  // [m] camera-to-center
  double min_bbox_px = 3.0;
};

struct SceneSpec {
  std::uint64_t seed = 0;
  GeodeticPoint origin{37.4, -122.1, 10.0};
  std::vector<SimObject> objects;
  TrajectorySpec trajectory;
  std::vector<CameraModel> cameras;
  NoiseModel noise;
  std::vector<GhostSpec> ghosts;
  DetectorModel detector;

  /// All violations, one message per offending field.
  std::vector<std::string> problems() const {
    std::vector<std::string> out;
    if (!origin.valid()) out.push_back("origin: latitude/longitude out of range");
    if (trajectory.waypoints.size() < 2) out.push_back("trajectory.waypoints: need at least 2");
    for (std::size_t i = 1; i < trajectory.waypoints.size(); ++i) {
      if ((trajectory.waypoints[i] - trajectory.waypoints[i - 1]).norm() <= 0.0) {
        out.push_back("trajectory.waypoints[" + std::to_string(i) + "]: repeats the previous waypoint");
      }
    }
    if (!(trajectory.speed > 0.0)) out.push_back("trajectory.speed: must be > 0");
    if (!(trajectory.sample_rate > 0.0)) out.push_back("trajectory.sample_rate: must be > 0");
    if (cameras.empty()) out.push_back("cameras: need at least one");
    for (std::size_t i = 0; i < cameras.size(); ++i) {
      try {
        tmo3d::validate(cameras[i]);
      } catch (const Error& e) {
        out.push_back("cameras[" + std::to_string(i) + "]: " + e.what());
      }
    }
    for (std::size_t i = 0; i < objects.size(); ++i) {
      if (!objects[i].extent.valid()) out.push_back("objects[" + std::to_string(i) + "].extent: must be > 0");
      if (!objects[i].center_enu.allFinite()) out.push_back("objects[" + std::to_string(i) + "].center_enu: not finite");
    }
    if (!(noise.pixel_sigma >= 0.0)) out.push_back("noise.pixel_sigma: must be >= 0");
    if (!(noise.pose_position_sigma >= 0.0)) out.push_back("noise.pose_position_sigma: must be >= 0");
    if (!(noise.pose_yaw_sigma_deg >= 0.0)) out.push_back("noise.pose_yaw_sigma_deg: must be >= 0");
    if (!(noise.dropout >= 0.0 && noise.dropout <= 1.0)) out.push_back("noise.dropout: must be in [0, 1]");
    if (noise.attribute_noise) {
      const auto& a = *noise.attribute_noise;
      if (a.key.empty()) out.push_back("noise.attribute_noise.key: empty");
      if (!(a.probability >= 0.0 && a.probability <= 1.0)) {
        out.push_back("noise.attribute_noise.probability: must be in [0, 1]");
      }
      if (a.values.size() < 2) out.push_back("noise.attribute_noise.values: need at least 2");
    }
    for (std::size_t i = 0; i < ghosts.size(); ++i) {
      const std::string where = "ghosts[" + std::to_string(i) + "]";
      if (ghosts[i].object >= objects.size()) out.push_back(where + ".object: no such object");
      if (ghosts[i].frame < 0) out.push_back(where + ".frame: must be >= 0");
      if (!(ghosts[i].depth_offset > 0.0)) out.push_back(where + ".depth_offset: must be > 0");
      bool known = false;
      for (const auto& c : cameras) known = known || c.camera_id == ghosts[i].camera;
      if (!known) out.push_back(where + ".camera: unknown camera '" + ghosts[i].camera + "'");
    }
    if (!(detector.confidence >= 0.0 && detector.confidence <= 1.0)) {
      out.push_back("detector.confidence: must be in [0, 1]");
    }
    if (!(detector.max_range > 0.0)) out.push_back("detector.max_range: must be > 0");
    if (!(detector.min_bbox_px >= 0.0)) out.push_back("detector.min_bbox_px: must be >= 0");
    return out;
  }

  void validate() const {
    const auto p = problems();
    if (p.empty()) return;
    std::string msg = "invalid scene spec:";
    for (const auto& s : p) msg += "\n  " + s;
    throw Error(ErrorCode::kValidation, msg);
  }
};

struct SimOutput {
  PoseTrack true_poses;
  PoseTrack poses;  // with pose noise; what the pipeline sees
  CameraRig rig;
  std::vector<Detection2D> detections;
  std::vector<FrameRef> frames;
  std::vector<ObjectBox3D> ground_truth;  // object_id = index in SceneSpec::objects
  std::vector<ObjectBox3D> ghosts;        // object_id = kGhostIdBase + index
};

inline constexpr std::int64_t kGhostIdBase = 1'000'000;

/// Forward-looking camera at `mount` (vehicle frame) with the usual
/// z-forward / x-right / y-down optical convention.
inline CameraModel forward_camera(std::string id, int width, int height, double focal,
                                  const Vec3& mount = Vec3(1.5, 0.0, 1.5)) {
  CameraModel cam;
  cam.camera_id = std::move(id);
  cam.width = width;
  cam.height = height;
  cam.fx = cam.fy = focal;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  Mat3 r;
  // Columns: camera x (right) = -vehicle y, camera y (down) = -vehicle z, camera z = vehicle x.
  r << 0.0, 0.0, 1.0,
      -1.0, 0.0, 0.0,
       0.0, -1.0, 0.0;
  cam.camera_to_vehicle = Eigen::Isometry3d::Identity();
  cam.camera_to_vehicle.linear() = r;
  cam.camera_to_vehicle.translation() = mount;
  return cam;
}

/// Ground-truth box of a scene object (yaw re-expressed at the object's own
/// tangent plane).
inline ObjectBox3D to_box(const SimObject& o, const GeodeticPoint& origin, std::int64_t id) {
  ObjectBox3D box;
  box.object_id = id;
  box.cls = o.cls;
  box.center = enu_to_ecef(o.center_enu, origin);
  box.extent = o.extent;
  const double yaw = o.yaw_deg * kDegToRad;
  const Vec3 facing = ecef_to_enu_rotation(origin).transpose() * Vec3(std::cos(yaw), std::sin(yaw), 0.0);
  box.yaw = LocalFrame::at(box.center).heading_of(facing);
  box.attributes = o.attributes;
  return box;
}

/// Noise-free poses along the route at constant speed.
inline std::vector<GeoPose> sample_trajectory(const TrajectorySpec& t, const GeodeticPoint& origin) {
  const Mat3 enu_to_ecef_rot = ecef_to_enu_rotation(origin).transpose();
  std::vector<double> cumulative{0.0};
  for (std::size_t i = 1; i < t.waypoints.size(); ++i) {
    cumulative.push_back(cumulative.back() + (t.waypoints[i] - t.waypoints[i - 1]).norm());
  }
  const double length = cumulative.back();
  const double step = t.speed / t.sample_rate;
  const auto count = static_cast<std::int64_t>(std::floor(length / step + 1e-9)) + 1;

  std::vector<GeoPose> poses;
  poses.reserve(static_cast<std::size_t>(count));
  std::size_t seg = 0;
  for (std::int64_t k = 0; k < count; ++k) {
    const double s = std::min(static_cast<double>(k) * step, length);
    while (seg + 2 < t.waypoints.size() && s > cumulative[seg + 1]) ++seg;
    const Vec2 a = t.waypoints[seg];
    const Vec2 b = t.waypoints[seg + 1];
    const double u = (s - cumulative[seg]) / (cumulative[seg + 1] - cumulative[seg]);
    const Vec2 p = a + u * (b - a);
    const Vec2 dir = (b - a).normalized();
    const EcefPoint pos = enu_to_ecef(Vec3(p.x(), p.y(), t.height), origin);
    const Vec3 fwd = enu_to_ecef_rot * Vec3(dir.x(), dir.y(), 0.0);
    poses.push_back(pose_from_forward(static_cast<double>(k) / t.sample_rate, pos, fwd));
  }
  return poses;
}

/// Tight image hull of a box, or nullopt unless every corner is in front of
/// the camera and inside the image.
inline std::optional<BBox2D> tight_hull(const CameraModel& cam, const GeoPose& pose,
                                        const ObjectBox3D& box) {
  BBox2D hull{1e300, 1e300, -1e300, -1e300};
  for (const auto& c : box.corners()) {
    const Projection p = project(cam, pose, c);
    if (!p.visible()) return std::nullopt;
    hull.x_min = std::min(hull.x_min, p.pixel.x());
    hull.y_min = std::min(hull.y_min, p.pixel.y());
    hull.x_max = std::max(hull.x_max, p.pixel.x());
    hull.y_max = std::max(hull.y_max, p.pixel.y());
  }
  return hull;
}

inline SimOutput generate_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  SimOutput out;
  out.rig = CameraRig(spec.cameras);
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    out.ground_truth.push_back(to_box(spec.objects[i], spec.origin, static_cast<std::int64_t>(i)));
  }

  const auto truth = sample_trajectory(spec.trajectory, spec.origin);
  out.true_poses = PoseTrack(truth);

  std::vector<GeoPose> noisy;
  noisy.reserve(truth.size());
  for (const auto& pose : truth) {
    const LocalFrame frame = LocalFrame::at(pose.position);
    const double de = gauss(rng), dn = gauss(rng), du = gauss(rng), dyaw = gauss(rng);
    GeoPose p = pose;
    p.position += spec.noise.pose_position_sigma * (de * frame.east + dn * frame.north + du * frame.up);
    const double yaw = spec.noise.pose_yaw_sigma_deg * kDegToRad * dyaw;
    p.orientation = (Quat(Eigen::AngleAxisd(yaw, frame.up)) * pose.orientation).normalized();
    noisy.push_back(p);
  }
  out.poses = PoseTrack(std::move(noisy));

  const double max_range2 = spec.detector.max_range * spec.detector.max_range;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const GeoPose& pose = truth[k];
    const auto frame_id = static_cast<std::int64_t>(k);
    FrameRef frame{frame_id, pose.timestamp, {}};
    for (const auto& cam : out.rig.cameras()) {
      frame.cameras.push_back(cam.camera_id);
      for (const auto& box : out.ground_truth) {
        const double n[4] = {gauss(rng), gauss(rng), gauss(rng), gauss(rng)};
        const double drop = uniform(rng);
        const double flip = uniform(rng);
        const double pick = uniform(rng);
        if ((box.center - cam.center(pose)).squaredNorm() > max_range2) continue;
        auto hull = tight_hull(cam, pose, box);
        if (!hull || hull->width() < spec.detector.min_bbox_px ||
            hull->height() < spec.detector.min_bbox_px) {
          continue;
        }
        if (drop < spec.noise.dropout) continue;
        const double s = spec.noise.pixel_sigma;
        BBox2D b{hull->x_min + s * n[0], hull->y_min + s * n[1], hull->x_max + s * n[2],
                 hull->y_max + s * n[3]};
        b.x_min = std::clamp(b.x_min, 0.0, double(cam.width));
        b.x_max = std::clamp(b.x_max, 0.0, double(cam.width));
        b.y_min = std::clamp(b.y_min, 0.0, double(cam.height));
        b.y_max = std::clamp(b.y_max, 0.0, double(cam.height));
        if (!b.valid()) continue;

        Detection2D d;
        d.frame_id = frame_id;
        d.timestamp = pose.timestamp;
        d.camera_id = cam.camera_id;
        d.cls = box.cls;
        d.bbox = b;
        d.confidence = spec.detector.confidence;
        d.attributes = box.attributes;
        if (const auto& an = spec.noise.attribute_noise; an && flip < an->probability) {
          auto it = d.attributes.find(an->key);
          if (it != d.attributes.end()) {
            std::vector<std::string> others;
            for (const auto& v : an->values) {
              if (v != it->second) others.push_back(v);
            }
            if (!others.empty()) {
              const auto idx = std::min(others.size() - 1,
                                        static_cast<std::size_t>(pick * static_cast<double>(others.size())));
              it->second = others[idx];
            }
          }
        }
        out.detections.push_back(std::move(d));
      }
    }
    out.frames.push_back(std::move(frame));
  }

  for (std::size_t i = 0; i < spec.ghosts.size(); ++i) {
    const auto& g = spec.ghosts[i];
    if (static_cast<std::size_t>(g.frame) >= truth.size()) {
      throw Error(ErrorCode::kValidation, "ghosts[" + std::to_string(i) + "].frame: beyond the trajectory");
    }
    const GeoPose& pose = truth[static_cast<std::size_t>(g.frame)];
    const CameraModel& cam = out.rig.at(g.camera);
    ObjectBox3D ghost = out.ground_truth[g.object];
    if (!(to_camera_frame(cam, pose, ghost.center).z() > 0.0)) {
      throw Error(ErrorCode::kValidation,
                  "ghosts[" + std::to_string(i) + "]: object is behind the camera at that frame");
    }
    const Vec3 dir = (ghost.center - cam.center(pose)).normalized();
    const Vec3 facing = ghost.facing();
    ghost.center += g.depth_offset * dir;
    ghost.yaw = LocalFrame::at(ghost.center).heading_of(facing);
    ghost.object_id = kGhostIdBase + static_cast<std::int64_t>(i);
    ghost.attributes.clear();
    out.ghosts.push_back(std::move(ghost));
  }
  return out;
}

/// Sequence as the pipeline would load it from the simulator's files.
inline Sequence to_sequence(const SimOutput& sim, std::string name = "sim") {
  return {std::move(name), sim.poses, sim.rig, sim.detections, sim.frames};
}

/// Ground-truth annotations (true poses, no detection overlay).
inline std::vector<FrameAnnotation> ground_truth_annotations(const SimOutput& sim,
                                                             const ExportConfig& cfg) {
  std::vector<FrameAnnotation> out;
  out.reserve(sim.frames.size());
  for (const auto& f : sim.frames) {
    out.push_back(annotate_frame(sim.ground_truth, f.frame_id, sim.true_poses.at(f.timestamp), sim.rig, cfg));
  }
  return out;
}

}  // namespace tmo3d::sim
