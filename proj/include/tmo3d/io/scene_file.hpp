#pragma once

// Scene spec file (JSON) for the simulator:
//
//   {
//     "seed": 7,
//     "origin": {"latitude": 37.4, "longitude": -122.1, "altitude": 10.0},
//     "trajectory": {"waypoints": [[0, 0], [150, 0]], "speed": 10.0, "sample_rate": 30.0, "height": 0.0},
//     "cameras": [
//       {"id": "front", "width": 1920, "height": 1080, "focal": 1400.0, "mount": [1.5, 0.0, 1.5]}
//     ],
//     "objects": [
//       {"class": "traffic_light", "center_enu": [40, 1.5, 5.5],
//        "extent": {"width": 0.35, "depth": 0.35, "height": 1.0}, "yaw_deg": 180.0,
//        "attributes": {"state": "red"}}
//     ],
//     "noise": {"pixel_sigma": 0, "pose_position_sigma": 0, "pose_yaw_sigma_deg": 0, "dropout": 0,
//               "attribute_noise": {"key": "state", "probability": 0.1, "values": ["red", "green"]}},
//     "ghosts": [{"object": 0, "frame": 60, "camera": "front", "depth_offset": 3.0}],
//     "detector": {"confidence": 0.9, "max_range": 200.0, "min_bbox_px": 3.0}
//   }
//
// Cameras use the shorthand above (forward-looking pinhole mounted at `mount`
// in the vehicle frame) or the full calibration-file camera object.
// Only "cameras" and "trajectory.waypoints" are required. Every problem found
// is reported at once.

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmo3d/error.hpp"
#include "tmo3d/io/annotation_io.hpp"
#include "tmo3d/io/calibration_file.hpp"
#include "tmo3d/sim.hpp"

namespace tmo3d::io {

namespace detail {

/// Reads typed fields and records every problem instead of stopping at the first.
class SpecReader {
 public:
  std::vector<std::string> problems;

  bool object(const nlohmann::json& j, const std::string& where, const std::set<std::string>& keys) {
    if (!j.is_object()) {
      problems.push_back(where + ": must be an object");
      return false;
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!keys.contains(it.key())) problems.push_back(where + "." + it.key() + ": unknown key");
    }
    return true;
  }

  void number(const nlohmann::json& j, const char* key, const std::string& where, double& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) {
      problems.push_back(where + "." + key + ": must be a number");
      return;
    }
    out = j[key].get<double>();
  }

  template <class Int>
  void integer(const nlohmann::json& j, const char* key, const std::string& where, Int& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer() || (std::is_unsigned_v<Int> && j[key].get<std::int64_t>() < 0)) {
      problems.push_back(where + "." + key + ": must be " +
                         (std::is_unsigned_v<Int> ? "a non-negative integer" : "an integer"));
      return;
    }
    out = j[key].get<Int>();
  }

  void string(const nlohmann::json& j, const char* key, const std::string& where, std::string& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_string()) {
      problems.push_back(where + "." + key + ": must be a string");
      return;
    }
    out = j[key].get<std::string>();
  }

  bool vector(const nlohmann::json& j, const std::string& where, std::size_t n, double* out) {
    if (!j.is_array() || j.size() != n) {
      problems.push_back(where + ": must be an array of " + std::to_string(n) + " numbers");
      return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!j[i].is_number()) {
        problems.push_back(where + ": must be an array of " + std::to_string(n) + " numbers");
        return false;
      }
      out[i] = j[i].get<double>();
    }
    return true;
  }

  void attributes(const nlohmann::json& j, const std::string& where, Attributes& out) {
    if (!j.is_object()) {
      problems.push_back(where + ": must be an object of strings");
      return;
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!it.value().is_string()) {
        problems.push_back(where + "." + it.key() + ": must be a string");
        continue;
      }
      out[it.key()] = it.value().get<std::string>();
    }
  }
};

}  // namespace detail

inline sim::SceneSpec scene_from_json(const nlohmann::json& j, const std::string& source = "scene") {
  sim::SceneSpec spec;
  detail::SpecReader r;
  if (r.object(j, "scene", {"seed", "origin", "trajectory", "cameras", "objects", "noise", "ghosts", "detector"})) {
    r.integer(j, "seed", "scene", spec.seed);

    if (j.contains("origin") && r.object(j["origin"], "origin", {"latitude", "longitude", "altitude"})) {
      r.number(j["origin"], "latitude", "origin", spec.origin.latitude);
      r.number(j["origin"], "longitude", "origin", spec.origin.longitude);
      r.number(j["origin"], "altitude", "origin", spec.origin.altitude);
    }

    if (!j.contains("trajectory")) {
      r.problems.push_back("trajectory: missing");
    } else if (r.object(j["trajectory"], "trajectory", {"waypoints", "speed", "sample_rate", "height"})) {
      const auto& t = j["trajectory"];
      if (!t.contains("waypoints") || !t["waypoints"].is_array()) {
        r.problems.push_back("trajectory.waypoints: must be an array of [east, north] pairs");
      } else {
        for (std::size_t i = 0; i < t["waypoints"].size(); ++i) {
          Vec2 w;
          if (r.vector(t["waypoints"][i], "trajectory.waypoints[" + std::to_string(i) + "]", 2, w.data())) {
            spec.trajectory.waypoints.push_back(w);
          }
        }
      }
      r.number(t, "speed", "trajectory", spec.trajectory.speed);
      r.number(t, "sample_rate", "trajectory", spec.trajectory.sample_rate);
      r.number(t, "height", "trajectory", spec.trajectory.height);
    }

    if (!j.contains("cameras") || !j["cameras"].is_array()) {
      r.problems.push_back("cameras: must be an array");
    } else {
      for (std::size_t i = 0; i < j["cameras"].size(); ++i) {
        const auto& c = j["cameras"][i];
        const std::string where = "cameras[" + std::to_string(i) + "]";
        if (c.is_object() && c.contains("focal")) {
          if (!r.object(c, where, {"id", "width", "height", "focal", "mount"})) continue;
          std::string id;
          int width = 0, height = 0;
          double focal = 0.0;
          Vec3 mount(1.5, 0.0, 1.5);
          r.string(c, "id", where, id);
          r.integer(c, "width", where, width);
          r.integer(c, "height", where, height);
          r.number(c, "focal", where, focal);
          if (c.contains("mount")) r.vector(c["mount"], where + ".mount", 3, mount.data());
          spec.cameras.push_back(sim::forward_camera(id, width, height, focal, mount));
        } else {
          try {
            const nlohmann::json wrapped{{"schema_version", kCalibrationSchemaVersion},
                                         {"cameras", nlohmann::json::array({c})}};
            spec.cameras.push_back(calibration_from_json(wrapped, where).cameras().front());
          } catch (const Error& e) {
            r.problems.push_back(e.what());
          }
        }
      }
    }

    if (j.contains("objects")) {
      if (!j["objects"].is_array()) {
        r.problems.push_back("objects: must be an array");
      } else {
        for (std::size_t i = 0; i < j["objects"].size(); ++i) {
          const auto& o = j["objects"][i];
          const std::string where = "objects[" + std::to_string(i) + "]";
          if (!r.object(o, where, {"class", "center_enu", "extent", "yaw_deg", "attributes"})) continue;
          sim::SimObject obj;
          std::string cls;
          r.string(o, "class", where, cls);
          if (const auto parsed = parse_object_class(cls)) {
            obj.cls = *parsed;
          } else {
            r.problems.push_back(where + ".class: must be traffic_light or traffic_sign");
          }
          if (!o.contains("center_enu")) {
            r.problems.push_back(where + ".center_enu: missing");
          } else {
            r.vector(o["center_enu"], where + ".center_enu", 3, obj.center_enu.data());
          }
          if (!o.contains("extent")) {
            r.problems.push_back(where + ".extent: missing");
          } else if (r.object(o["extent"], where + ".extent", {"width", "depth", "height"})) {
            r.number(o["extent"], "width", where + ".extent", obj.extent.width);
            r.number(o["extent"], "depth", where + ".extent", obj.extent.depth);
            r.number(o["extent"], "height", where + ".extent", obj.extent.height);
          }
          r.number(o, "yaw_deg", where, obj.yaw_deg);
          if (o.contains("attributes")) r.attributes(o["attributes"], where + ".attributes", obj.attributes);
          spec.objects.push_back(std::move(obj));
        }
      }
    }

    if (j.contains("noise") &&
        r.object(j["noise"], "noise",
                 {"pixel_sigma", "pose_position_sigma", "pose_yaw_sigma_deg", "dropout", "attribute_noise"})) {
      const auto& n = j["noise"];
      r.number(n, "pixel_sigma", "noise", spec.noise.pixel_sigma);
      r.number(n, "pose_position_sigma", "noise", spec.noise.pose_position_sigma);
      r.number(n, "pose_yaw_sigma_deg", "noise", spec.noise.pose_yaw_sigma_deg);
      r.number(n, "dropout", "noise", spec.noise.dropout);
      if (n.contains("attribute_noise") &&
          r.object(n["attribute_noise"], "noise.attribute_noise", {"key", "probability", "values"})) {
        const auto& a = n["attribute_noise"];
        sim::AttributeNoise an;
        r.string(a, "key", "noise.attribute_noise", an.key);
        r.number(a, "probability", "noise.attribute_noise", an.probability);
        if (a.contains("values") && a["values"].is_array()) {
          for (const auto& v : a["values"]) {
            if (v.is_string()) {
              an.values.push_back(v.get<std::string>());
            } else {
              r.problems.push_back("noise.attribute_noise.values: must hold strings");
            }
          }
        } else {
          r.problems.push_back("noise.attribute_noise.values: must be an array");
        }
        spec.noise.attribute_noise = std::move(an);
      }
    }

    if (j.contains("ghosts")) {
      if (!j["ghosts"].is_array()) {
        r.problems.push_back("ghosts: must be an array");
      } else {
        for (std::size_t i = 0; i < j["ghosts"].size(); ++i) {
          const auto& g = j["ghosts"][i];
          const std::string where = "ghosts[" + std::to_string(i) + "]";
          if (!r.object(g, where, {"object", "frame", "camera", "depth_offset"})) continue;
          sim::GhostSpec ghost;
          r.integer(g, "object", where, ghost.object);
          r.integer(g, "frame", where, ghost.frame);
          r.string(g, "camera", where, ghost.camera);
          r.number(g, "depth_offset", where, ghost.depth_offset);
          spec.ghosts.push_back(std::move(ghost));
        }
      }
    }

    if (j.contains("detector") && r.object(j["detector"], "detector", {"confidence", "max_range", "min_bbox_px"})) {
      r.number(j["detector"], "confidence", "detector", spec.detector.confidence);
      r.number(j["detector"], "max_range", "detector", spec.detector.max_range);
      r.number(j["detector"], "min_bbox_px", "detector", spec.detector.min_bbox_px);
    }
  }

  auto problems = r.problems;
  for (auto& p : spec.problems()) {
    if (std::find(problems.begin(), problems.end(), p) == problems.end()) problems.push_back(std::move(p));
  }
  if (!problems.empty()) {
    std::string msg = source + ": invalid scene spec:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(ErrorCode::kValidation, msg);
  }
  return spec;
}

inline sim::SceneSpec read_scene(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kIo, "scene spec not found: '" + path.string() + "'");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return scene_from_json(j, path.string());
}

}  // namespace tmo3d::io
