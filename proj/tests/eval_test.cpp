#include <algorithm>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "tmo3d/eval.hpp"

namespace tmo3d::eval {
namespace {

AnnotatedObject obj(std::int64_t id, double x, double y, ObjectClass cls = ObjectClass::kTrafficLight,
                    double yaw = 0.0) {
  AnnotatedObject o;
  o.object_id = id;
  o.cls = cls;
  o.center = Vec3(x, y, 2.0);
  o.yaw = yaw;
  return o;
}

FrameAnnotation frame(std::int64_t id, std::vector<AnnotatedObject> objects) {
  FrameAnnotation f;
  f.frame_id = id;
  f.objects = std::move(objects);
  return f;
}

// Exhaustive search over all partial injections: maximum number of admissible
// pairs, then minimum summed distance.
std::pair<std::size_t, double> brute_force(const std::vector<AnnotatedObject>& p,
                                           const std::vector<AnnotatedObject>& g, const EvalConfig& cfg) {
  std::pair<std::size_t, double> best{0, 0.0};
  std::vector<char> used(g.size(), 0);
  const auto rec = [&](auto&& self, std::size_t i, std::size_t n, double sum) -> void {
    if (i == p.size()) {
      if (n > best.first || (n == best.first && sum < best.second - 1e-12)) best = {n, sum};
      return;
    }
    self(self, i + 1, n, sum);
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (used[j] || p[i].cls != g[j].cls) continue;
      const double d = (p[i].center - g[j].center).norm();
      if (d > cfg.association_threshold) continue;
      used[j] = 1;
      self(self, i + 1, n + 1, sum + d);
      used[j] = 0;
    }
  };
  rec(rec, 0, 0, 0.0);
  return best;
}

TEST(Associate, SpecExamples) {
  const EvalConfig cfg;
  const std::vector<AnnotatedObject> gt{obj(1, 20.0, 0.0)};
  auto a = associate(std::vector{obj(9, 20.3, 0.0)}, gt, cfg);
  EXPECT_EQ(a.matches.size(), 1u);
  EXPECT_NEAR(a.matches[0].distance, 0.3, 1e-12);

  a = associate(std::vector{obj(9, 21.5, 0.0)}, gt, cfg);
  EXPECT_EQ(a.matches.size(), 0u);
  EXPECT_EQ(a.false_positives.size(), 1u);
  EXPECT_EQ(a.false_negatives.size(), 1u);

  a = associate(std::vector{obj(8, 20.4, 0.0), obj(9, 20.0, 0.2)}, gt, cfg);
  ASSERT_EQ(a.matches.size(), 1u);
  EXPECT_EQ(a.matches[0].pred.object_id, 9);
  ASSERT_EQ(a.false_positives.size(), 1u);
  EXPECT_EQ(a.false_positives[0].object.object_id, 8);
}

TEST(Associate, ClassMatchIsConfigurable) {
  EvalConfig cfg;
  const std::vector<AnnotatedObject> gt{obj(1, 20.0, 0.0, ObjectClass::kTrafficSign)};
  const std::vector<AnnotatedObject> pred{obj(2, 20.1, 0.0, ObjectClass::kTrafficLight)};
  EXPECT_EQ(associate(pred, gt, cfg).matches.size(), 0u);
  cfg.require_class_match = false;
  EXPECT_EQ(associate(pred, gt, cfg).matches.size(), 1u);
}

TEST(Associate, HungarianMatchesBruteForce) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> pos(0.0, 3.0);
  std::uniform_int_distribution<int> count(0, 6), cls(0, 1);
  EvalConfig hung;
  hung.matcher = Matcher::kHungarian;
  int greedy_suboptimal = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<AnnotatedObject> p, g;
    const int np = count(rng), ng = count(rng);
    for (int i = 0; i < np; ++i) p.push_back(obj(i, pos(rng), pos(rng), ObjectClass(cls(rng))));
    for (int j = 0; j < ng; ++j) g.push_back(obj(100 + j, pos(rng), pos(rng), ObjectClass(cls(rng))));
    const auto oracle = brute_force(p, g, hung);
    const auto a = associate(p, g, hung);
    double sum = 0.0;
    for (const auto& m : a.matches) sum += m.distance;
    ASSERT_EQ(a.matches.size(), oracle.first) << "trial " << trial;
    EXPECT_NEAR(sum, oracle.second, 1e-9) << "trial " << trial;
    EXPECT_EQ(a.matches.size() + a.false_positives.size(), p.size());
    EXPECT_EQ(a.matches.size() + a.false_negatives.size(), g.size());

    const auto greedy = associate(p, g, EvalConfig{});
    EXPECT_LE(greedy.matches.size(), oracle.first);
    greedy_suboptimal += greedy.matches.size() < oracle.first;
  }
  // Dense random layouts exercise cases where greedy is not maximal.
  EXPECT_GT(greedy_suboptimal, 0);
}

TEST(Associate, PermutationAndSwapInvariance) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(0.0, 4.0);
  std::vector<AnnotatedObject> p, g;
  for (int i = 0; i < 8; ++i) p.push_back(obj(i, pos(rng), pos(rng)));
  for (int j = 0; j < 7; ++j) g.push_back(obj(50 + j, pos(rng), pos(rng)));
  const auto a = associate(p, g, EvalConfig{});
  auto pp = p, gg = g;
  std::shuffle(pp.begin(), pp.end(), rng);
  std::shuffle(gg.begin(), gg.end(), rng);
  const auto b = associate(pp, gg, EvalConfig{});
  const auto swapped = associate(g, p, EvalConfig{});
  const auto pairs = [](const Association& x, bool swap) {
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    for (const auto& m : x.matches) {
      out.emplace_back(swap ? m.gt.object_id : m.pred.object_id, swap ? m.pred.object_id : m.gt.object_id);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  EXPECT_EQ(pairs(a, false), pairs(b, false));
  EXPECT_EQ(pairs(a, false), pairs(swapped, true));
  EXPECT_EQ(a.false_positives.size(), swapped.false_negatives.size());
}

TEST(Metrics, Definitions) {
  std::vector<Match> ms;
  for (int i = 0; i < 9; ++i) ms.push_back({0, obj(i, 0, 0), obj(i, 0, 0), 0.0});
  auto m = compute_metrics(ms, 1, 0);
  EXPECT_DOUBLE_EQ(*m.precision, 0.9);
  EXPECT_DOUBLE_EQ(*m.recall, 1.0);

  std::vector<Match> two{{0, obj(1, 0, 0, ObjectClass::kTrafficLight, 0.1), obj(1, 0, 0, ObjectClass::kTrafficLight, -0.1), 0.1},
                         {0, obj(2, 0, 0, ObjectClass::kTrafficLight, 3.1), obj(2, 0, 0, ObjectClass::kTrafficLight, 3.3 - 2.0 * std::numbers::pi), 0.3}};
  m = compute_metrics(two, 0, 0);
  EXPECT_DOUBLE_EQ(*m.localization_mean, 0.2);
  EXPECT_NEAR(*m.localization_std, 0.1, 1e-12);
  // Both yaw errors are 0.2 rad once wrapped.
  EXPECT_NEAR(*m.orientation_mae_deg, 0.2 * 180.0 / std::numbers::pi, 1e-9);

  m = compute_metrics({}, 0, 0);
  EXPECT_FALSE(m.precision);
  EXPECT_FALSE(m.recall);
  EXPECT_FALSE(m.localization_mean);
  m = compute_metrics({}, 0, 4);
  EXPECT_FALSE(m.precision);
  EXPECT_DOUBLE_EQ(*m.recall, 0.0);
}

TEST(Metrics, OrientationErrorWraps) {
  EXPECT_NEAR(orientation_error_deg(std::numbers::pi - 0.01, -std::numbers::pi + 0.01), 0.02 * 180.0 / std::numbers::pi,
              1e-9);
  EXPECT_NEAR(orientation_error_deg(0.0, std::numbers::pi), 180.0, 1e-9);
}

TEST(Bins, SingleBinPopulated) {
  EvalConfig cfg;
  Association a;
  a.matches.push_back({0, obj(1, 15.0, 1.0), obj(1, 15.0, 1.0), 0.0});
  const auto g = binned_report(a, cfg);
  EXPECT_EQ(g.lateral, 5);
  EXPECT_EQ(g.longitudinal, 20);
  for (int lon = 0; lon < g.longitudinal; ++lon) {
    for (int lat = 0; lat < g.lateral; ++lat) {
      const bool expected = lon == 1 && lat == 2;  // [10, 20) x [-2, 2)
      EXPECT_EQ(!g.at(lon, lat).empty(), expected) << lon << "," << lat;
    }
  }
  EXPECT_DOUBLE_EQ(g.lateral_edge(2), -2.0);
  EXPECT_DOUBLE_EQ(g.longitudinal_edge(1), 10.0);
}

TEST(Bins, EmptyInputAllAbsent) {
  const auto g = binned_report(Association{}, EvalConfig{});
  for (const auto& c : g.cells) {
    EXPECT_TRUE(c.empty());
    EXPECT_FALSE(c.precision());
    EXPECT_FALSE(c.recall());
    EXPECT_FALSE(c.localization_mean());
  }
}

TEST(Bins, FalsePositivesUsePredictedCenter) {
  Association a;
  a.false_positives.push_back({0, obj(1, 55.0, -9.0)});
  a.false_negatives.push_back({0, obj(2, 199.9, 10.0)});
  const auto g = binned_report(a, EvalConfig{});
  EXPECT_EQ(g.at(5, 0).fp, 1u);
  EXPECT_EQ(g.at(19, 4).fn, 1u);
}

TEST(Bins, GridMustTile) {
  EvalConfig cfg;
  cfg.bin_lateral = 3.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.range_longitudinal = 80.0;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.longitudinal_bins(), 8);
}

TEST(ClassifyAccuracy, Ratio) {
  std::vector<Match> ms;
  for (int i = 0; i < 50; ++i) {
    auto p = obj(i, 0, 0), g = obj(i, 0, 0);
    p.attributes["state"] = i < 47 ? "red" : "green";
    g.attributes["state"] = "red";
    ms.push_back({0, p, g, 0.0});
  }
  EXPECT_DOUBLE_EQ(*classify_accuracy(ms, "state"), 0.94);
  EXPECT_FALSE(classify_accuracy(ms, "type"));
}

TEST(Evaluate, PoolsFramesAndReportsMismatchedFrameSets) {
  const std::vector<FrameAnnotation> gt{frame(0, {obj(1, 10.0, 0.0), obj(2, 50.0, 3.0)}),
                                        frame(1, {obj(1, 9.0, 0.0), obj(2, 49.0, 3.0), obj(3, 300.0, 0.0)}),
                                        frame(2, {obj(1, 8.0, 0.0)})};
  const std::vector<FrameAnnotation> pred{frame(0, {obj(7, 10.2, 0.0)}),
                                          frame(1, {obj(7, 9.2, 0.0), obj(8, 49.5, 3.0), obj(9, 70.0, 0.0)}),
                                          frame(5, {obj(7, 1.0, 0.0)})};
  const auto r = evaluate(pred, gt, EvalConfig{});
  EXPECT_EQ(r.frames_evaluated, 2u);
  EXPECT_EQ(r.frames_only_in_gt, std::vector<std::int64_t>{2});
  EXPECT_EQ(r.frames_only_in_pred, std::vector<std::int64_t>{5});
  EXPECT_EQ(r.metrics.tp, 3u);
  EXPECT_EQ(r.metrics.fp, 1u);
  EXPECT_EQ(r.metrics.fn, 1u);
  EXPECT_EQ(r.objects.gt_objects, 2u);
  EXPECT_EQ(r.objects.gt_found, 2u);
  EXPECT_EQ(r.objects.pred_objects, 3u);
  EXPECT_EQ(r.objects.pred_matched, 2u);
}

}  // namespace
}  // namespace tmo3d::eval
