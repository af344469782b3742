#pragma once

// Evaluation report files:
//
//   <dir>/summary.txt                 human-readable overview
//   <dir>/report.json                 every scalar plus the per-bin grid
//   <dir>/grid_<metric>.csv           one grid per metric: tp, fp, fn,
//                                     precision, recall, localization_error,
//                                     orientation_mae_deg
//
// CSV rows are longitudinal bins (nearest first), columns lateral bins from
// -range_lateral upwards. Absent values are empty cells.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "tmo3d/eval.hpp"
#include "tmo3d/io/annotation_io.hpp"
#include "tmo3d/io/fixed_json.hpp"

namespace tmo3d::io {

namespace detail {

inline std::string edge_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

inline nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline std::string optional_text(const std::optional<double>& v, const char* unit = "") {
  return v ? format_fixed(*v) + unit : std::string("n/a");
}

}  // namespace detail

using BinMetric = std::function<std::optional<double>(const eval::BinStats&)>;

inline const std::vector<std::pair<std::string, BinMetric>>& bin_metrics() {
  static const std::vector<std::pair<std::string, BinMetric>> kMetrics{
      {"tp", [](const eval::BinStats& b) { return std::optional<double>(double(b.tp)); }},
      {"fp", [](const eval::BinStats& b) { return std::optional<double>(double(b.fp)); }},
      {"fn", [](const eval::BinStats& b) { return std::optional<double>(double(b.fn)); }},
      {"precision", [](const eval::BinStats& b) { return b.precision(); }},
      {"recall", [](const eval::BinStats& b) { return b.recall(); }},
      {"localization_error", [](const eval::BinStats& b) { return b.localization_mean(); }},
      {"orientation_mae_deg", [](const eval::BinStats& b) { return b.orientation_mae_deg(); }},
  };
  return kMetrics;
}

inline std::string grid_csv(const eval::BinGrid& g, const BinMetric& metric, bool integer) {
  std::string out = "longitudinal";
  for (int lat = 0; lat < g.lateral; ++lat) {
    out += ",lat[" + detail::edge_text(g.lateral_edge(lat)) + ";" + detail::edge_text(g.lateral_edge(lat + 1)) + ")";
  }
  out += "\n";
  for (int lon = 0; lon < g.longitudinal; ++lon) {
    out += "[" + detail::edge_text(g.longitudinal_edge(lon)) + ";" + detail::edge_text(g.longitudinal_edge(lon + 1)) + ")";
    for (int lat = 0; lat < g.lateral; ++lat) {
      out += ",";
      const auto v = metric(g.at(lon, lat));
      if (v) out += integer ? std::to_string(static_cast<long long>(*v)) : format_fixed(*v);
    }
    out += "\n";
  }
  return out;
}

inline nlohmann::json report_to_json(const eval::EvalReport& r) {
  const auto& m = r.metrics;
  nlohmann::json j{{"frames_evaluated", r.frames_evaluated},
                   {"frames_only_in_pred", r.frames_only_in_pred},
                   {"frames_only_in_gt", r.frames_only_in_gt},
                   {"tp", m.tp},
                   {"fp", m.fp},
                   {"fn", m.fn},
                   {"precision", detail::optional_json(m.precision)},
                   {"recall", detail::optional_json(m.recall)},
                   {"localization_error_mean", detail::optional_json(m.localization_mean)},
                   {"localization_error_std", detail::optional_json(m.localization_std)},
                   {"orientation_mae_deg", detail::optional_json(m.orientation_mae_deg)}};
  j["per_object"] = {{"gt_objects", r.objects.gt_objects},
                     {"gt_found", r.objects.gt_found},
                     {"pred_objects", r.objects.pred_objects},
                     {"pred_matched", r.objects.pred_matched},
                     {"recall", detail::optional_json(r.objects.recall)},
                     {"precision", detail::optional_json(r.objects.precision)}};
  nlohmann::json acc = nlohmann::json::object();
  for (const auto& [k, v] : r.attribute_accuracy) acc[k] = detail::optional_json(v);
  j["attribute_accuracy"] = acc;
  nlohmann::json bins = nlohmann::json::array();
  const auto& g = r.grid;
  for (int lon = 0; lon < g.longitudinal; ++lon) {
    for (int lat = 0; lat < g.lateral; ++lat) {
      const auto& b = g.at(lon, lat);
      if (b.empty()) continue;
      bins.push_back({{"longitudinal", {g.longitudinal_edge(lon), g.longitudinal_edge(lon + 1)}},
                      {"lateral", {g.lateral_edge(lat), g.lateral_edge(lat + 1)}},
                      {"tp", b.tp},
                      {"fp", b.fp},
                      {"fn", b.fn},
                      {"precision", detail::optional_json(b.precision())},
                      {"recall", detail::optional_json(b.recall())},
                      {"localization_error", detail::optional_json(b.localization_mean())},
                      {"orientation_mae_deg", detail::optional_json(b.orientation_mae_deg())}});
    }
  }
  j["bins"] = bins;
  return j;
}

inline std::string report_summary(const eval::EvalReport& r) {
  const auto& m = r.metrics;
  std::string s;
  s += "frames evaluated: " + std::to_string(r.frames_evaluated) + "\n";
  if (!r.frames_only_in_pred.empty() || !r.frames_only_in_gt.empty()) {
    s += "frames only in predictions: " + std::to_string(r.frames_only_in_pred.size()) +
         ", only in ground truth: " + std::to_string(r.frames_only_in_gt.size()) + "\n";
  }
  s += "TP " + std::to_string(m.tp) + "  FP " + std::to_string(m.fp) + "  FN " + std::to_string(m.fn) + "\n";
  s += "precision: " + detail::optional_text(m.precision) + "\n";
  s += "recall: " + detail::optional_text(m.recall) + "\n";
  s += "localization error: " + detail::optional_text(m.localization_mean, " m");
  if (m.localization_std) s += " +/- " + format_fixed(*m.localization_std) + " m";
  s += "\n";
  s += "orientation MAE: " + detail::optional_text(m.orientation_mae_deg, " deg") + "\n";
  s += "per object: " + std::to_string(r.objects.gt_found) + "/" + std::to_string(r.objects.gt_objects) +
       " ground-truth objects found, " + std::to_string(r.objects.pred_matched) + "/" +
       std::to_string(r.objects.pred_objects) + " predicted objects matched\n";
  for (const auto& [k, v] : r.attribute_accuracy) s += "accuracy[" + k + "]: " + detail::optional_text(v) + "\n";
  return s;
}

inline void write_report(const eval::EvalReport& r, const std::filesystem::path& dir) {
  ensure_directory(dir);
  write_text_file(dir / "summary.txt", report_summary(r));
  write_text_file(dir / "report.json", dump_fixed(report_to_json(r)));
  for (const auto& [name, metric] : bin_metrics()) {
    const bool integer = name == "tp" || name == "fp" || name == "fn";
    write_text_file(dir / ("grid_" + name + ".csv"), grid_csv(r.grid, metric, integer));
  }
}

}  // namespace tmo3d::io
