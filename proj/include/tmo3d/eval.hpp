#pragma once

// Evaluation: per-frame association of predicted and ground-truth boxes in
// vehicle coordinates, pooled precision / recall / localization / orientation
// statistics, and the same statistics on a lateral x longitudinal grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "tmo3d/error.hpp"
#include "tmo3d/export.hpp"
#include "tmo3d/geo.hpp"

namespace tmo3d::eval {

enum class Matcher { kGreedy, kHungarian };

struct EvalConfig {
  double association_threshold = 1.0;  // m, center distance
  double range_lateral = 10.0;
  double range_longitudinal = 200.0;
  double bin_lateral = 4.0;
  double bin_longitudinal = 10.0;
  bool require_class_match = true;
  Matcher matcher = Matcher::kGreedy;

  int lateral_bins() const { return static_cast<int>(std::lround(2.0 * range_lateral / bin_lateral)); }
  int longitudinal_bins() const {
    return static_cast<int>(std::lround(range_longitudinal / bin_longitudinal));
  }

  void validate() const {
    const auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfig, what); };
    if (!(association_threshold > 0.0)) fail("association_threshold must be positive");
    if (!(range_lateral > 0.0 && range_longitudinal > 0.0)) fail("eval ranges must be positive");
    if (!(bin_lateral > 0.0 && bin_longitudinal > 0.0)) fail("bin sizes must be positive");
    if (std::abs(lateral_bins() * bin_lateral - 2.0 * range_lateral) > 1e-9 || lateral_bins() < 1) {
      fail("bin_lateral must tile [-range_lateral, range_lateral] exactly");
    }
    if (std::abs(longitudinal_bins() * bin_longitudinal - range_longitudinal) > 1e-9 ||
        longitudinal_bins() < 1) {
      fail("bin_longitudinal must tile [0, range_longitudinal] exactly");
    }
  }
};

inline bool in_range(const Vec3& v, const EvalConfig& cfg) {
  return std::abs(v.y()) <= cfg.range_lateral && v.x() >= 0.0 && v.x() <= cfg.range_longitudinal;
}

struct Match {
  std::int64_t frame_id = 0;
  AnnotatedObject pred;
  AnnotatedObject gt;
  double distance = 0.0;
};

struct Unmatched {
  std::int64_t frame_id = 0;
  AnnotatedObject object;
};

struct Association {
  std::vector<Match> matches;
  std::vector<Unmatched> false_positives;
  std::vector<Unmatched> false_negatives;

  void append(Association&& other) {
    for (auto& m : other.matches) matches.push_back(std::move(m));
    for (auto& u : other.false_positives) false_positives.push_back(std::move(u));
    for (auto& u : other.false_negatives) false_negatives.push_back(std::move(u));
  }
};

/// Minimum-cost perfect assignment of rows to columns (rows <= cols).
/// Returns the column of each row.
inline std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  if (n == 0) return {};
  const std::size_t m = cost[0].size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) assignment[p[j] - 1] = j - 1;
  }
  return assignment;
}

/// Associates one frame's predictions with its ground truth. Both inputs are
/// expected to be range-filtered already. Greedy mode accepts pairs in order
/// of increasing distance (ties by prediction, then ground-truth index);
/// Hungarian mode maximizes the number of admissible pairs, then minimizes
/// their summed distance.
inline Association associate(std::span<const AnnotatedObject> preds,
                             std::span<const AnnotatedObject> gts, const EvalConfig& cfg,
                             std::int64_t frame_id = 0) {
  const auto admissible = [&](const AnnotatedObject& p, const AnnotatedObject& g) {
    return !cfg.require_class_match || p.cls == g.cls;
  };
  std::vector<char> pred_used(preds.size(), 0), gt_used(gts.size(), 0);
  Association out;
  const auto accept = [&](std::size_t i, std::size_t j, double d) {
    pred_used[i] = gt_used[j] = 1;
    out.matches.push_back({frame_id, preds[i], gts[j], d});
  };

  if (cfg.matcher == Matcher::kGreedy) {
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      for (std::size_t j = 0; j < gts.size(); ++j) {
        const double d = (preds[i].center - gts[j].center).norm();
        if (d <= cfg.association_threshold && admissible(preds[i], gts[j])) pairs.emplace_back(d, i, j);
      }
    }
    std::sort(pairs.begin(), pairs.end());
    for (const auto& [d, i, j] : pairs) {
      if (!pred_used[i] && !gt_used[j]) accept(i, j, d);
    }
  } else if (!preds.empty() && !gts.empty()) {
    const bool transpose = preds.size() > gts.size();
    const std::size_t rows = transpose ? gts.size() : preds.size();
    const std::size_t cols = transpose ? preds.size() : gts.size();
    // Inadmissible pairs cost more than any full set of admissible ones.
    const double big = (cfg.association_threshold + 1.0) * static_cast<double>(rows + 1);
    std::vector<std::vector<double>> cost(rows, std::vector<double>(cols, big));
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const auto& p = preds[transpose ? c : r];
        const auto& g = gts[transpose ? r : c];
        const double d = (p.center - g.center).norm();
        if (d <= cfg.association_threshold && admissible(p, g)) cost[r][c] = d;
      }
    }
    const auto assignment = hungarian(cost);
    std::vector<std::tuple<std::size_t, std::size_t, double>> chosen;
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t c = assignment[r];
      if (cost[r][c] >= big) continue;
      chosen.emplace_back(transpose ? c : r, transpose ? r : c, cost[r][c]);
    }
    std::sort(chosen.begin(), chosen.end());
    for (const auto& [i, j, d] : chosen) accept(i, j, d);
  }

  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!pred_used[i]) out.false_positives.push_back({frame_id, preds[i]});
  }
  for (std::size_t j = 0; j < gts.size(); ++j) {
    if (!gt_used[j]) out.false_negatives.push_back({frame_id, gts[j]});
  }
  return out;
}

/// Absolute yaw difference in degrees, wrapped to [0, 180].
inline double orientation_error_deg(double yaw_pred, double yaw_gt) {
  return std::abs(wrap_angle(yaw_pred - yaw_gt)) * kRadToDeg;
}

struct Metrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> localization_mean;  // m
  std::optional<double> localization_std;   // population std, m
  std::optional<double> orientation_mae_deg;
};

inline Metrics compute_metrics(std::span<const Match> matches, std::size_t fps, std::size_t fns) {
  Metrics m;
  m.tp = matches.size();
  m.fp = fps;
  m.fn = fns;
  if (m.tp + m.fp > 0) m.precision = double(m.tp) / double(m.tp + m.fp);
  if (m.tp + m.fn > 0) m.recall = double(m.tp) / double(m.tp + m.fn);
  if (!matches.empty()) {
    double sum = 0.0, ori = 0.0;
    for (const auto& x : matches) {
      sum += x.distance;
      ori += orientation_error_deg(x.pred.yaw, x.gt.yaw);
    }
    const double n = double(matches.size());
    const double mean = sum / n;
    double var = 0.0;
    for (const auto& x : matches) var += (x.distance - mean) * (x.distance - mean);
    m.localization_mean = mean;
    m.localization_std = std::sqrt(var / n);
    m.orientation_mae_deg = ori / n;
  }
  return m;
}

inline Metrics compute_metrics(const Association& a) {
  return compute_metrics(a.matches, a.false_positives.size(), a.false_negatives.size());
}

struct BinStats {
  std::size_t tp = 0, fp = 0, fn = 0;
  double localization_sum = 0.0;
  double orientation_sum = 0.0;

  std::optional<double> precision() const {
    return tp + fp ? std::optional(double(tp) / double(tp + fp)) : std::nullopt;
  }
  std::optional<double> recall() const {
    return tp + fn ? std::optional(double(tp) / double(tp + fn)) : std::nullopt;
  }
  std::optional<double> localization_mean() const {
    return tp ? std::optional(localization_sum / double(tp)) : std::nullopt;
  }
  std::optional<double> orientation_mae_deg() const {
    return tp ? std::optional(orientation_sum / double(tp)) : std::nullopt;
  }
  bool empty() const { return tp + fp + fn == 0; }
};

/// Lateral x longitudinal grid. Row = longitudinal bin, column = lateral bin
/// (column 0 starts at -range_lateral). The upper range edges fall into the last bin.
struct BinGrid {
  int lateral = 0;
  int longitudinal = 0;
  double bin_lateral = 0.0;
  double bin_longitudinal = 0.0;
  double range_lateral = 0.0;
  std::vector<BinStats> cells;

  BinStats& at(int lon, int lat) { return cells[static_cast<std::size_t>(lon * lateral + lat)]; }
  const BinStats& at(int lon, int lat) const {
    return cells[static_cast<std::size_t>(lon * lateral + lat)];
  }

  std::pair<int, int> bin_of(const Vec3& v) const {
    const int lat = std::clamp(static_cast<int>(std::floor((v.y() + range_lateral) / bin_lateral)), 0, lateral - 1);
    const int lon = std::clamp(static_cast<int>(std::floor(v.x() / bin_longitudinal)), 0, longitudinal - 1);
    return {lon, lat};
  }

  double lateral_edge(int i) const { return -range_lateral + i * bin_lateral; }
  double longitudinal_edge(int i) const { return i * bin_longitudinal; }
};

/// Matches and FNs go to the bin of the ground-truth center, FPs to the bin of
/// the predicted center.
inline BinGrid binned_report(const Association& a, const EvalConfig& cfg) {
  cfg.validate();
  BinGrid g;
  g.lateral = cfg.lateral_bins();
  g.longitudinal = cfg.longitudinal_bins();
  g.bin_lateral = cfg.bin_lateral;
  g.bin_longitudinal = cfg.bin_longitudinal;
  g.range_lateral = cfg.range_lateral;
  g.cells.assign(static_cast<std::size_t>(g.lateral * g.longitudinal), {});
  for (const auto& m : a.matches) {
    auto [lon, lat] = g.bin_of(m.gt.center);
    auto& c = g.at(lon, lat);
    ++c.tp;
    c.localization_sum += m.distance;
    c.orientation_sum += orientation_error_deg(m.pred.yaw, m.gt.yaw);
  }
  for (const auto& u : a.false_positives) {
    auto [lon, lat] = g.bin_of(u.object.center);
    ++g.at(lon, lat).fp;
  }
  for (const auto& u : a.false_negatives) {
    auto [lon, lat] = g.bin_of(u.object.center);
    ++g.at(lon, lat).fn;
  }
  return g;
}

/// Fraction of matches whose `key` attribute agrees; absent when no match
/// carries the attribute on both sides.
inline std::optional<double> classify_accuracy(std::span<const Match> matches, const std::string& key) {
  std::size_t total = 0, equal = 0;
  for (const auto& m : matches) {
    auto p = m.pred.attributes.find(key);
    auto g = m.gt.attributes.find(key);
    if (p == m.pred.attributes.end() || g == m.gt.attributes.end()) continue;
    ++total;
    equal += p->second == g->second;
  }
  if (total == 0) return std::nullopt;
  return double(equal) / double(total);
}

/// Physical-object view: a ground-truth object counts as found when it is
/// matched in at least one frame; a prediction counts as correct likewise.
struct ObjectLevel {
  std::size_t gt_objects = 0;
  std::size_t gt_found = 0;
  std::size_t pred_objects = 0;
  std::size_t pred_matched = 0;
  std::optional<double> recall;
  std::optional<double> precision;
};

inline ObjectLevel object_level(const Association& a) {
  std::set<std::int64_t> gt_all, gt_hit, pred_all, pred_hit;
  for (const auto& m : a.matches) {
    gt_all.insert(m.gt.object_id);
    gt_hit.insert(m.gt.object_id);
    pred_all.insert(m.pred.object_id);
    pred_hit.insert(m.pred.object_id);
  }
  for (const auto& u : a.false_negatives) gt_all.insert(u.object.object_id);
  for (const auto& u : a.false_positives) pred_all.insert(u.object.object_id);
  ObjectLevel o{gt_all.size(), gt_hit.size(), pred_all.size(), pred_hit.size(), {}, {}};
  if (o.gt_objects) o.recall = double(o.gt_found) / double(o.gt_objects);
  if (o.pred_objects) o.precision = double(o.pred_matched) / double(o.pred_objects);
  return o;
}

struct EvalReport {
  Metrics metrics;
  BinGrid grid;
  Association association;
  ObjectLevel objects;
  std::map<std::string, std::optional<double>> attribute_accuracy;
  std::size_t frames_evaluated = 0;
  std::vector<std::int64_t> frames_only_in_pred;
  std::vector<std::int64_t> frames_only_in_gt;
};

inline std::vector<AnnotatedObject> filter_range(std::span<const AnnotatedObject> objs, const EvalConfig& cfg) {
  std::vector<AnnotatedObject> out;
  for (const auto& o : objs) {
    if (in_range(o.center, cfg)) out.push_back(o);
  }
  return out;
}

/// Pooled per-frame evaluation over the frames present on both sides.
inline EvalReport evaluate(std::span<const FrameAnnotation> preds, std::span<const FrameAnnotation> gts,
                           const EvalConfig& cfg) {
  cfg.validate();
  std::map<std::int64_t, const FrameAnnotation*> pred_by_id, gt_by_id;
  for (const auto& f : preds) pred_by_id[f.frame_id] = &f;
  for (const auto& f : gts) gt_by_id[f.frame_id] = &f;

  EvalReport report;
  for (const auto& [id, f] : pred_by_id) {
    if (!gt_by_id.contains(id)) report.frames_only_in_pred.push_back(id);
  }
  for (const auto& [id, g] : gt_by_id) {
    auto it = pred_by_id.find(id);
    if (it == pred_by_id.end()) {
      report.frames_only_in_gt.push_back(id);
      continue;
    }
    ++report.frames_evaluated;
    const auto p = filter_range(it->second->objects, cfg);
    const auto t = filter_range(g->objects, cfg);
    report.association.append(associate(p, t, cfg, id));
  }
  report.metrics = compute_metrics(report.association);
  report.grid = binned_report(report.association, cfg);
  report.objects = object_level(report.association);

  std::set<std::string> keys;
  for (const auto& m : report.association.matches) {
    for (const auto& [k, v] : m.gt.attributes) {
      if (m.pred.attributes.contains(k)) keys.insert(k);
    }
  }
  for (const auto& k : keys) report.attribute_accuracy[k] = classify_accuracy(report.association.matches, k);
  return report;
}

}  // namespace tmo3d::eval
