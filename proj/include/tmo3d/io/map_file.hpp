#pragma once

// ECEF object map (JSON), the intermediate product of localization + box
// fitting. `annotate` can reuse a stored map instead of re-triangulating.
//
//   {
//     "schema_version": 1,
//     "objects": [
//       {"object_id": 0, "class": "traffic_sign", "center_ecef": [x, y, z],
//        "extent": {"width": w, "depth": d, "height": h}, "yaw": rad (local ENU, CCW from east),
//        "support": 812, "attributes": {...}}
//     ]
//   }

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmo3d/error.hpp"
#include "tmo3d/io/annotation_io.hpp"
#include "tmo3d/io/fixed_json.hpp"
#include "tmo3d/object.hpp"

namespace tmo3d::io {

inline constexpr int kMapSchemaVersion = 1;

inline nlohmann::json map_to_json(std::span<const ObjectBox3D> objects) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& o : objects) {
    nlohmann::json j{{"object_id", o.object_id},
                     {"class", std::string(to_string(o.cls))},
                     {"center_ecef", {o.center.x(), o.center.y(), o.center.z()}},
                     {"extent", {{"width", o.extent.width}, {"depth", o.extent.depth}, {"height", o.extent.height}}},
                     {"yaw", o.yaw},
                     {"support", o.support}};
    if (!o.attributes.empty()) j["attributes"] = o.attributes;
    arr.push_back(std::move(j));
  }
  return {{"schema_version", kMapSchemaVersion}, {"objects", arr}};
}

inline std::vector<ObjectBox3D> map_from_json(const nlohmann::json& j, const std::string& source = "map") {
  try {
    if (!j.is_object() || !j.contains("schema_version") || j["schema_version"] != kMapSchemaVersion) {
      throw Error(ErrorCode::kParse, "schema_version must be " + std::to_string(kMapSchemaVersion));
    }
    if (!j.contains("objects") || !j["objects"].is_array()) {
      throw Error(ErrorCode::kParse, "missing 'objects' array");
    }
    std::vector<ObjectBox3D> out;
    for (const auto& o : j["objects"]) {
      ObjectBox3D box;
      if (!o.contains("object_id") || !o["object_id"].is_number_integer()) {
        throw Error(ErrorCode::kParse, "object without integer 'object_id'");
      }
      box.object_id = o["object_id"].get<std::int64_t>();
      box.cls = detail::object_class(o);
      box.center = detail::vec3(o, "center_ecef");
      box.extent = detail::extent(o);
      box.yaw = detail::number(o, "yaw");
      box.support = o.value("support", std::int64_t{0});
      if (o.contains("attributes")) box.attributes = o["attributes"].get<Attributes>();
      validate(box);
      out.push_back(std::move(box));
    }
    return out;
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, source + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, source + ": " + e.what());
  }
}

inline void write_map(std::span<const ObjectBox3D> objects, const std::filesystem::path& path) {
  write_text_file(path, dump_fixed(map_to_json(objects)));
}

inline std::vector<ObjectBox3D> read_map(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return map_from_json(j, path.string());
}

}  // namespace tmo3d::io
