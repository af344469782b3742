#pragma once

// Calibration file (JSON):
//
//   {
//     "schema_version": 1,
//     "cameras": [
//       {
//         "id": "front",
//         "width": 1920, "height": 1080,
//         "fx": 1400.0, "fy": 1400.0, "cx": 960.0, "cy": 540.0,
//         "distortion": {"k1": 0.0, "k2": 0.0},          // optional
//         "camera_to_vehicle": [16 numbers, 4x4 row-major rigid transform]
//       }
//     ]
//   }
//
// Camera frame: z optical axis, x right, y down.

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmo3d/camera.hpp"
#include "tmo3d/error.hpp"
#include "tmo3d/io/annotation_io.hpp"
#include "tmo3d/io/fixed_json.hpp"

namespace tmo3d::io {

inline constexpr int kCalibrationSchemaVersion = 1;

inline CameraRig calibration_from_json(const nlohmann::json& j, const std::string& source = "calibration") {
  const auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kParse, source + ": " + what);
  };
  if (!j.is_object()) fail("top level must be an object");
  if (!j.contains("schema_version") || j["schema_version"] != kCalibrationSchemaVersion) {
    fail("schema_version must be " + std::to_string(kCalibrationSchemaVersion));
  }
  if (!j.contains("cameras") || !j["cameras"].is_array() || j["cameras"].empty()) {
    fail("'cameras' must be a non-empty array");
  }
  static const std::set<std::string> kKeys{"id", "width", "height", "fx", "fy", "cx",
                                           "cy", "distortion", "camera_to_vehicle"};
  std::vector<CameraModel> cams;
  for (std::size_t i = 0; i < j["cameras"].size(); ++i) {
    const auto& c = j["cameras"][i];
    const std::string where = "camera #" + std::to_string(i) + ": ";
    if (!c.is_object()) fail(where + "must be an object");
    for (auto it = c.begin(); it != c.end(); ++it) {
      if (!kKeys.contains(it.key())) fail(where + "unknown key '" + it.key() + "'");
    }
    const auto num = [&](const char* key) {
      if (!c.contains(key) || !c[key].is_number()) fail(where + "missing numeric '" + key + "'");
      return c[key].get<double>();
    };
    CameraModel cam;
    if (!c.contains("id") || !c["id"].is_string()) fail(where + "missing string 'id'");
    cam.camera_id = c["id"].get<std::string>();
    if (!c.contains("width") || !c["width"].is_number_integer() || !c.contains("height") ||
        !c["height"].is_number_integer()) {
      fail(where + "width/height must be integers");
    }
    cam.width = c["width"].get<int>();
    cam.height = c["height"].get<int>();
    cam.fx = num("fx");
    cam.fy = num("fy");
    cam.cx = num("cx");
    cam.cy = num("cy");
    if (c.contains("distortion")) {
      const auto& d = c["distortion"];
      if (!d.is_object()) fail(where + "'distortion' must be an object");
      for (auto it = d.begin(); it != d.end(); ++it) {
        if (it.key() != "k1" && it.key() != "k2") fail(where + "unknown distortion key '" + it.key() + "'");
        if (!it.value().is_number()) fail(where + "distortion values must be numbers");
      }
      cam.k1 = d.value("k1", 0.0);
      cam.k2 = d.value("k2", 0.0);
    }
    if (!c.contains("camera_to_vehicle") || !c["camera_to_vehicle"].is_array() ||
        c["camera_to_vehicle"].size() != 16) {
      fail(where + "'camera_to_vehicle' must hold 16 numbers");
    }
    Eigen::Matrix4d m;
    for (int r = 0; r < 4; ++r) {
      for (int k = 0; k < 4; ++k) {
        const auto& v = c["camera_to_vehicle"][static_cast<std::size_t>(4 * r + k)];
        if (!v.is_number()) fail(where + "'camera_to_vehicle' must hold numbers");
        m(r, k) = v.get<double>();
      }
    }
    if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9) {
      fail(where + "last row of camera_to_vehicle must be 0 0 0 1");
    }
    cam.camera_to_vehicle.matrix() = m;
    try {
      validate(cam);
    } catch (const Error& e) {
      fail(e.what());
    }
    cams.push_back(std::move(cam));
  }
  try {
    return CameraRig(std::move(cams));
  } catch (const Error& e) {
    fail(e.what());
  }
  return {};
}

inline CameraRig read_calibration(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kIo, "calibration file not found: '" + path.string() + "'");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return calibration_from_json(j, path.string());
}

inline nlohmann::json to_json(const CameraRig& rig) {
  nlohmann::json cams = nlohmann::json::array();
  for (const auto& c : rig.cameras()) {
    nlohmann::json m = nlohmann::json::array();
    const Eigen::Matrix4d t = c.camera_to_vehicle.matrix();
    for (int r = 0; r < 4; ++r)
      for (int k = 0; k < 4; ++k) m.push_back(t(r, k));
    cams.push_back({{"id", c.camera_id},
                    {"width", c.width},
                    {"height", c.height},
                    {"fx", c.fx},
                    {"fy", c.fy},
                    {"cx", c.cx},
                    {"cy", c.cy},
                    {"distortion", {{"k1", c.k1}, {"k2", c.k2}}},
                    {"camera_to_vehicle", m}});
  }
  return {{"schema_version", kCalibrationSchemaVersion}, {"cameras", cams}};
}

}  // namespace tmo3d::io
