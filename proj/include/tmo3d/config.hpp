#pragma once

// Pipeline configuration. Every tunable lives in exactly one field of
// PipelineConfig; `config_fields` enumerates them with their JSON section,
// key and help text, and is the single table used for JSON loading, dumping,
// command-line overrides and the generated help.
//
// JSON layout:
//
//   {
//     "triangulation": {"min_confidence": 0.7, ...},
//     "boxfit": {...}, "refine": {...}, "export": {...}, "eval": {...},
//     "runtime": {"workers": 1, "log_level": "info"}
//   }
//
// Sections and keys are optional; unknown ones are rejected.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmo3d/boxfit.hpp"
#include "tmo3d/error.hpp"
#include "tmo3d/eval.hpp"
#include "tmo3d/export.hpp"
#include "tmo3d/io/annotation_io.hpp"
#include "tmo3d/io/fixed_json.hpp"
#include "tmo3d/io/text_lines.hpp"
#include "tmo3d/refine.hpp"
#include "tmo3d/triangulate.hpp"

namespace tmo3d {

struct RuntimeConfig {
  std::size_t workers = 1;  // sequences processed concurrently
  std::string log_level = "info";
};

struct PipelineConfig {
  TriangulationConfig triangulation;
  BoxFitConfig boxfit;
  RefineConfig refine;
  ExportConfig export_;
  eval::EvalConfig eval;
  RuntimeConfig runtime;

  /// Refine scores against the same detections that were triangulated.
  RefineConfig refine_config() const {
    RefineConfig r = refine;
    r.min_confidence = triangulation.min_confidence;
    return r;
  }

  void validate() const {
    triangulation.validate();
    boxfit.validate();
    refine_config().validate();
    export_.validate();
    eval.validate();
    if (runtime.workers < 1) throw Error(ErrorCode::kConfig, "runtime.workers must be >= 1");
    static const std::vector<std::string> kLevels{"trace", "debug", "info", "warn", "error", "off"};
    if (std::find(kLevels.begin(), kLevels.end(), runtime.log_level) == kLevels.end()) {
      throw Error(ErrorCode::kConfig, "runtime.log_level must be one of trace|debug|info|warn|error|off");
    }
  }
};

/// String-valued field with a fixed set of spellings.
struct ChoiceField {
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
  std::vector<std::string> options;
};

struct ConfigField {
  std::string section;
  std::string key;
  std::string help;
  std::variant<double*, std::size_t*, bool*, std::string*, ChoiceField> target;

  std::string name() const { return section + "." + key; }
};

inline std::vector<ConfigField> config_fields(PipelineConfig& c) {
  auto& t = c.triangulation;
  auto& b = c.boxfit;
  auto& r = c.refine;
  auto& x = c.export_;
  auto& e = c.eval;
  ChoiceField matcher{
      [&e] { return e.matcher == eval::Matcher::kGreedy ? std::string("greedy") : std::string("hungarian"); },
      [&e](const std::string& v) {
        if (v == "greedy") {
          e.matcher = eval::Matcher::kGreedy;
        } else if (v == "hungarian") {
          e.matcher = eval::Matcher::kHungarian;
        } else {
          throw Error(ErrorCode::kConfig, "eval.matcher must be greedy or hungarian, got '" + v + "'");
        }
      },
      {"greedy", "hungarian"}};
  return {
      {"triangulation", "min_confidence", "detections below this confidence are ignored", &t.min_confidence},
      {"triangulation", "max_line_gap", "max distance between two sightlines to form a candidate [m]",
       &t.max_line_gap},
      {"triangulation", "dbscan_eps", "DBSCAN neighborhood radius over candidate points [m]", &t.dbscan_eps},
      {"triangulation", "dbscan_min_pts", "DBSCAN core point threshold (neighborhood includes the point)",
       &t.dbscan_min_pts},
      {"triangulation", "min_ray_angle_deg", "sightline pairs closer to parallel are skipped [deg]",
       &t.min_ray_angle_deg},
      {"triangulation", "min_travel", "minimum ego path length for a sequence [m]", &t.min_travel},
      {"triangulation", "min_point_range", "candidates closer than this to either camera are dropped [m]",
       &t.min_point_range},
      {"boxfit", "sign_depth", "fixed depth assigned to signs [m]", &b.sign_depth},
      {"boxfit", "light_orientation_distance", "ego distance used to orient traffic lights [m]",
       &b.light_orientation_distance},
      {"boxfit", "degenerate_view_deg",
       "views more oblique than 90 minus this to the section plane are skipped [deg]", &b.degenerate_view_deg},
      {"refine", "los_angle_threshold_deg", "sightline angle under which two boxes share a line [deg]",
       &r.los_angle_threshold_deg},
      {"refine", "min_shared_frames", "frames on a shared sightline needed to link two boxes",
       &r.min_shared_frames},
      {"refine", "min_frames_scored", "boxes scored in fewer frames are dropped as unverifiable",
       &r.min_frames_scored},
      {"refine", "max_scoring_range", "frames farther than this from a box are not scored [m]",
       &r.max_scoring_range},
      {"export", "range_lateral", "annotated lateral range, |y| <= value [m]", &x.range_lateral},
      {"export", "range_longitudinal", "annotated longitudinal range, 0 <= x <= value [m]",
       &x.range_longitudinal},
      {"export", "attribute_min_iou", "min detection/projection IoU to take per-frame attributes",
       &x.attribute_min_iou},
      {"eval", "association_threshold", "max center distance for a match [m]", &e.association_threshold},
      {"eval", "range_lateral", "evaluated lateral range [m]", &e.range_lateral},
      {"eval", "range_longitudinal", "evaluated longitudinal range [m]", &e.range_longitudinal},
      {"eval", "bin_lateral", "lateral bin size of the error grid [m]", &e.bin_lateral},
      {"eval", "bin_longitudinal", "longitudinal bin size of the error grid [m]", &e.bin_longitudinal},
      {"eval", "require_class_match", "only same-class pairs can match", &e.require_class_match},
      {"eval", "matcher", "association strategy: greedy or hungarian", std::move(matcher)},
      {"runtime", "workers", "sequences processed concurrently", &c.runtime.workers},
      {"runtime", "log_level", "trace|debug|info|warn|error|off", &c.runtime.log_level},
  };
}

/// Current value of a field as text, for help output and dumps.
inline std::string field_value_text(const ConfigField& f) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double*>) {
          return io::format_fixed(*p);
        } else if constexpr (std::is_same_v<T, std::size_t*>) {
          return std::to_string(*p);
        } else if constexpr (std::is_same_v<T, bool*>) {
          return *p ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string*>) {
          return *p;
        } else {
          return p.get();
        }
      },
      f.target);
}

inline void apply_json_value(const ConfigField& f, const nlohmann::json& v) {
  const auto fail = [&](const std::string& want) {
    throw Error(ErrorCode::kConfig, f.name() + ": expected " + want + ", got " + v.dump());
  };
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double*>) {
          if (!v.is_number()) fail("a number");
          *p = v.get<double>();
        } else if constexpr (std::is_same_v<T, std::size_t*>) {
          if (!v.is_number_unsigned()) fail("a non-negative integer");
          *p = v.get<std::size_t>();
        } else if constexpr (std::is_same_v<T, bool*>) {
          if (!v.is_boolean()) fail("a boolean");
          *p = v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string*>) {
          if (!v.is_string()) fail("a string");
          *p = v.get<std::string>();
        } else {
          if (!v.is_string()) fail("a string");
          p.set(v.get<std::string>());
        }
      },
      f.target);
}

/// Sets a field from command-line text, converting by the field's type.
inline void apply_text_value(const ConfigField& f, const std::string& text) {
  const auto fail = [&](const std::string& want) {
    throw Error(ErrorCode::kConfig, f.name() + ": expected " + want + ", got '" + text + "'");
  };
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double*>) {
          const auto v = io::parse_double(text);
          if (!v) fail("a number");
          *p = *v;
        } else if constexpr (std::is_same_v<T, std::size_t*>) {
          const auto v = io::parse_int(text);
          if (!v || *v < 0) fail("a non-negative integer");
          *p = static_cast<std::size_t>(*v);
        } else if constexpr (std::is_same_v<T, bool*>) {
          if (text == "true" || text == "1") {
            *p = true;
          } else if (text == "false" || text == "0") {
            *p = false;
          } else {
            fail("true or false");
          }
        } else if constexpr (std::is_same_v<T, std::string*>) {
          *p = text;
        } else {
          p.set(text);
        }
      },
      f.target);
}

inline nlohmann::json field_json_value(const ConfigField& f) {
  return std::visit(
      [](const auto& p) -> nlohmann::json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ChoiceField>) {
          return p.get();
        } else {
          return *p;
        }
      },
      f.target);
}

/// Overlays `j` onto `cfg`. Unknown sections or keys are errors.
inline void apply_config_json(PipelineConfig& cfg, const nlohmann::json& j, const std::string& source = "config") {
  if (!j.is_object()) throw Error(ErrorCode::kConfig, source + ": top level must be an object");
  const auto fields = config_fields(cfg);
  for (auto sec = j.begin(); sec != j.end(); ++sec) {
    const bool known_section = std::any_of(fields.begin(), fields.end(),
                                           [&](const ConfigField& f) { return f.section == sec.key(); });
    if (!known_section) throw Error(ErrorCode::kConfig, source + ": unknown section '" + sec.key() + "'");
    if (!sec.value().is_object()) {
      throw Error(ErrorCode::kConfig, source + ": section '" + sec.key() + "' must be an object");
    }
    for (auto kv = sec.value().begin(); kv != sec.value().end(); ++kv) {
      auto it = std::find_if(fields.begin(), fields.end(), [&](const ConfigField& f) {
        return f.section == sec.key() && f.key == kv.key();
      });
      if (it == fields.end()) {
        throw Error(ErrorCode::kConfig, source + ": unknown key '" + sec.key() + "." + kv.key() + "'");
      }
      try {
        apply_json_value(*it, kv.value());
      } catch (const Error& e) {
        throw Error(ErrorCode::kConfig, source + ": " + e.what());
      }
    }
  }
}

inline nlohmann::json config_to_json(const PipelineConfig& cfg) {
  PipelineConfig copy = cfg;
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : config_fields(copy)) j[f.section][f.key] = field_json_value(f);
  return j;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kIo, "config file not found: '" + path.string() + "'");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kConfig, path.string() + ": " + e.what());
  }
  PipelineConfig cfg;
  apply_config_json(cfg, j, path.string());
  cfg.validate();
  return cfg;
}

}  // namespace tmo3d
