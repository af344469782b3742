#pragma once

// Annotation files: one JSON document per frame, `<dir>/<frame_id>.json`.
//
//   {
//     "frame_id": 17,
//     "objects": [
//       {
//         "attributes": {"state": "red"},            // optional
//         "center": [x, y, z],                         // vehicle frame, m
//         "class": "traffic_light" | "traffic_sign",
//         "extent": {"depth": d, "height": h, "width": w},
//         "object_id": 3,
//         "projections": {"front": [x_min, y_min, x_max, y_max]},  // optional
//         "yaw": 3.141593                              // rad, vehicle frame
//       }
//     ],
//     "schema_version": 1,
//     "timestamp": 0.566667
//   }

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmo3d/error.hpp"
#include "tmo3d/export.hpp"
#include "tmo3d/io/fixed_json.hpp"

namespace tmo3d::io {

inline constexpr int kAnnotationSchemaVersion = 1;

inline nlohmann::json to_json(const FrameAnnotation& ann) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : ann.objects) {
    nlohmann::json j;
    j["object_id"] = o.object_id;
    j["class"] = std::string(to_string(o.cls));
    j["center"] = {o.center.x(), o.center.y(), o.center.z()};
    j["extent"] = {{"width", o.extent.width}, {"depth", o.extent.depth}, {"height", o.extent.height}};
    j["yaw"] = o.yaw;
    if (!o.attributes.empty()) j["attributes"] = o.attributes;
    if (!o.projections.empty()) {
      nlohmann::json p;
      for (const auto& [cam, b] : o.projections) p[cam] = {b.x_min, b.y_min, b.x_max, b.y_max};
      j["projections"] = p;
    }
    objects.push_back(std::move(j));
  }
  return {{"schema_version", kAnnotationSchemaVersion},
          {"frame_id", ann.frame_id},
          {"timestamp", ann.timestamp},
          {"objects", objects}};
}

inline std::string serialize(const FrameAnnotation& ann) { return dump_fixed(to_json(ann)); }

namespace detail {

inline double number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw Error(ErrorCode::kParse, std::string("missing numeric field '") + key + "'");
  }
  return j[key].get<double>();
}

inline Vec3 vec3(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3) {
    throw Error(ErrorCode::kParse, std::string("field '") + key + "' must be a 3-element array");
  }
  return {j[key][0].get<double>(), j[key][1].get<double>(), j[key][2].get<double>()};
}

inline Extent extent(const nlohmann::json& j) {
  if (!j.contains("extent") || !j["extent"].is_object()) {
    throw Error(ErrorCode::kParse, "missing 'extent' object");
  }
  const auto& e = j["extent"];
  return {number(e, "width"), number(e, "depth"), number(e, "height")};
}

inline ObjectClass object_class(const nlohmann::json& j) {
  if (!j.contains("class") || !j["class"].is_string()) {
    throw Error(ErrorCode::kParse, "missing 'class'");
  }
  const auto cls = parse_object_class(j["class"].get<std::string>());
  if (!cls) throw Error(ErrorCode::kParse, "unknown class '" + j["class"].get<std::string>() + "'");
  return *cls;
}

inline void check_schema(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    throw Error(ErrorCode::kParse, "missing schema_version");
  }
  if (j["schema_version"].get<int>() != kAnnotationSchemaVersion) {
    throw Error(ErrorCode::kParse,
                "unsupported schema_version " + std::to_string(j["schema_version"].get<int>()));
  }
}

}  // namespace detail

inline FrameAnnotation annotation_from_json(const nlohmann::json& j) {
  detail::check_schema(j);
  FrameAnnotation ann;
  if (!j.contains("frame_id") || !j["frame_id"].is_number_integer()) {
    throw Error(ErrorCode::kParse, "missing integer 'frame_id'");
  }
  ann.frame_id = j["frame_id"].get<std::int64_t>();
  ann.timestamp = detail::number(j, "timestamp");
  if (!j.contains("objects") || !j["objects"].is_array()) {
    throw Error(ErrorCode::kParse, "missing 'objects' array");
  }
  for (const auto& o : j["objects"]) {
    AnnotatedObject obj;
    if (!o.contains("object_id") || !o["object_id"].is_number_integer()) {
      throw Error(ErrorCode::kParse, "object without integer 'object_id'");
    }
    obj.object_id = o["object_id"].get<std::int64_t>();
    obj.cls = detail::object_class(o);
    obj.center = detail::vec3(o, "center");
    obj.extent = detail::extent(o);
    obj.yaw = detail::number(o, "yaw");
    if (o.contains("attributes")) obj.attributes = o["attributes"].get<Attributes>();
    if (o.contains("projections")) {
      for (auto it = o["projections"].begin(); it != o["projections"].end(); ++it) {
        const auto& b = it.value();
        if (!b.is_array() || b.size() != 4) {
          throw Error(ErrorCode::kParse, "projection for '" + it.key() + "' must have 4 values");
        }
        obj.projections.emplace(it.key(), BBox2D{b[0].get<double>(), b[1].get<double>(),
                                                 b[2].get<double>(), b[3].get<double>()});
      }
    }
    ann.objects.push_back(std::move(obj));
  }
  return ann;
}

inline FrameAnnotation parse_annotation(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
  return annotation_from_json(j);
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "cannot create directory '" + dir.string() + "': " + ec.message());
  }
}

/// Streaming writer: holds no annotations, one file per write().
class AnnotationWriter {
 public:
  explicit AnnotationWriter(std::filesystem::path dir) : dir_(std::move(dir)) { ensure_directory(dir_); }

  std::filesystem::path path_for(std::int64_t frame_id) const {
    return dir_ / (std::to_string(frame_id) + ".json");
  }

  void write(const FrameAnnotation& ann) {
    write_text_file(path_for(ann.frame_id), serialize(ann));
    ++written_;
  }

  std::size_t written() const { return written_; }
  const std::filesystem::path& directory() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::size_t written_ = 0;
};

inline void write_sequence(std::span<const FrameAnnotation> annotations,
                           const std::filesystem::path& dir) {
  AnnotationWriter writer(dir);
  for (const auto& a : annotations) writer.write(a);
}

/// Frame ids of every `<integer>.json` file in `dir`, ascending.
inline std::vector<std::int64_t> list_annotation_frames(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "not a directory: '" + dir.string() + "'");
  }
  std::vector<std::int64_t> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    const std::string stem = entry.path().stem().string();
    std::int64_t id = 0;
    const auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), id);
    if (ec == std::errc() && ptr == stem.data() + stem.size()) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

inline FrameAnnotation read_annotation(const std::filesystem::path& path) {
  try {
    return parse_annotation(read_text_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

inline std::vector<FrameAnnotation> read_sequence(const std::filesystem::path& dir) {
  std::vector<FrameAnnotation> out;
  for (auto id : list_annotation_frames(dir)) {
    out.push_back(read_annotation(dir / (std::to_string(id) + ".json")));
    if (out.back().frame_id != id) {
      throw Error(ErrorCode::kValidation,
                  (dir / (std::to_string(id) + ".json")).string() + ": frame_id does not match file name");
    }
  }
  return out;
}

}  // namespace tmo3d::io
