#include <cmath>

#include <gtest/gtest.h>

#include "support/synthetic.hpp"
#include "tmo3d/boxfit.hpp"

namespace tmo3d {
namespace {

using testing::enu;

struct View {
  GeoPose pose;
  CameraModel cam = sim::forward_camera("front", 1920, 1080, 1400.0);
};

// Vehicle at the origin heading east; camera center at ENU (1.5, 0, 1.5).
View origin_view(double heading_deg = 0.0) {
  const Vec3 dir = ecef_to_enu_rotation(testing::kOrigin).transpose() *
                   Vec3(std::cos(heading_deg * kDegToRad), std::sin(heading_deg * kDegToRad), 0.0);
  View v;
  v.pose = pose_from_forward(0.0, enu(0.0, 0.0, 0.0), dir);
  return v;
}

ObjectBox3D box_at(const EcefPoint& c, Extent e, double yaw) {
  ObjectBox3D b;
  b.center = c;
  b.extent = e;
  b.yaw = yaw;
  return b;
}

TEST(CrossSection, ThinPlateHeadOn) {
  const auto v = origin_view();
  const auto box = box_at(enu(21.5, 0.0, 1.5), {0.3, 0.001, 1.0}, std::numbers::pi);
  const auto hull = project_box(v.cam, v.pose, box);
  ASSERT_TRUE(hull);
  const auto s = cross_section(box.center, v.pose, v.cam, *hull, SectionMode::kCorners);
  ASSERT_TRUE(s);
  EXPECT_NEAR(s->width, 0.3, 1e-3);
  EXPECT_NEAR(s->height, 1.0, 1e-3);
}

TEST(CrossSection, DeepBoxHeadOnMatchesPinholeScaling) {
  // The front face is nearer by depth / 2 and is magnified by d / (d - depth / 2).
  const auto v = origin_view();
  const double d = 20.0, depth = 0.3;
  const auto box = box_at(enu(1.5 + d, 0.0, 1.5), {0.3, depth, 1.0}, std::numbers::pi);
  const auto s = cross_section(box.center, v.pose, v.cam, *project_box(v.cam, v.pose, box), SectionMode::kCorners);
  ASSERT_TRUE(s);
  const double scale = d / (d - depth / 2.0);
  EXPECT_NEAR(s->width, 0.3 * scale, 1e-6);
  EXPECT_NEAR(s->height, 1.0 * scale, 1e-6);
}

TEST(CrossSection, ObliqueViewApproachesDiagonalSection) {
  // Far away the projection is nearly orthographic: a square footprint seen at
  // 45 degrees spans (w + d) / sqrt(2) across the sightline.
  const auto v = origin_view(45.0);
  const double r = 500.0;
  const Vec3 cam_enu(1.5 / std::sqrt(2.0), 1.5 / std::sqrt(2.0), 1.5);
  const auto box = box_at(enu(cam_enu.x() + r / std::sqrt(2.0), cam_enu.y() + r / std::sqrt(2.0), 1.5),
                          {0.3, 0.3, 1.0}, std::numbers::pi);
  const auto hull = project_box(v.cam, v.pose, box);
  ASSERT_TRUE(hull);
  const auto s = cross_section(box.center, v.pose, v.cam, *hull, SectionMode::kCorners);
  ASSERT_TRUE(s);
  EXPECT_NEAR(s->width, 0.6 / std::sqrt(2.0), 5e-4);
  EXPECT_NEAR(s->height, 1.0, 5e-4);
}

TEST(CrossSection, EdgeMidpointsForSigns) {
  const auto v = origin_view();
  const auto box = box_at(enu(31.5, -3.0, 1.5), {0.75, 0.001, 0.75}, std::numbers::pi);
  const auto s = cross_section(box.center, v.pose, v.cam, *project_box(v.cam, v.pose, box),
                               SectionMode::kEdgeMidpoints, 7);
  ASSERT_TRUE(s);
  EXPECT_NEAR(s->height, 0.75, 2e-3);
  EXPECT_EQ(s->frame_id, 7);
  EXPECT_NEAR(s->line_of_sight.norm(), 1.0, 1e-12);
}

TEST(CrossSection, BehindCameraIsSkipped) {
  const auto v = origin_view();
  const BBox2D any{100, 100, 200, 200};
  EXPECT_FALSE(cross_section(enu(-10.0, 0.0, 1.5), v.pose, v.cam, any, SectionMode::kCorners));
  EXPECT_THROW(cross_section(enu(10.0, 0.0, 1.5), v.pose, v.cam, BBox2D{5, 5, 5, 9}, SectionMode::kCorners),
               Error);
}

TEST(CrossSection, SteepViewIsDegenerate) {
  View v = origin_view();
  Mat3 r;  // camera z along vehicle z
  r << 0.0, -1.0, 0.0,
      -1.0, 0.0, 0.0,
       0.0, 0.0, 1.0;
  r.col(1) = r.col(2).cross(r.col(0));
  v.cam.camera_to_vehicle.linear() = r;
  const EcefPoint overhead = enu(1.6, 0.0, 20.0);  // almost straight above the camera
  const BBox2D b{900, 500, 1000, 600};
  EXPECT_FALSE(cross_section(overhead, v.pose, v.cam, b, SectionMode::kCorners, 0, 5.0));
}

TEST(Extent, LightAveragesAndSignTakesWidest) {
  const std::vector<CrossSection> s{{0.3, 1.0, 0, Vec3::UnitX()}, {0.5, 1.4, 1, Vec3::UnitX()}};
  const Extent l = estimate_extent_light(s);
  EXPECT_DOUBLE_EQ(l.width, 0.4);
  EXPECT_DOUBLE_EQ(l.depth, 0.4);
  EXPECT_DOUBLE_EQ(l.height, 1.2);
  const Extent g = estimate_extent_sign(s, 0.1);
  EXPECT_DOUBLE_EQ(g.width, 0.5);
  EXPECT_DOUBLE_EQ(g.depth, 0.1);
  EXPECT_DOUBLE_EQ(g.height, 1.2);
  EXPECT_THROW(estimate_extent_light({}), Error);
  EXPECT_THROW(estimate_extent_sign({}), Error);
}

TEST(Orientation, LightMatchesExhaustivePoseScan) {
  // Curved drive: a quarter circle of radius 40 m around the light's side.
  std::vector<GeoPose> poses;
  const Mat3 to_ecef = ecef_to_enu_rotation(testing::kOrigin).transpose();
  for (int k = 0; k <= 90; ++k) {
    const double a = k * kDegToRad;
    const Vec3 p(40.0 * std::sin(a), 40.0 - 40.0 * std::cos(a), 0.0);
    const Vec3 fwd(std::cos(a), std::sin(a), 0.0);
    poses.push_back(pose_from_forward(k, enu(p.x(), p.y(), p.z()), to_ecef * fwd));
  }
  const EcefPoint light = enu(30.0, 20.0, 5.0);
  const double target = 12.0;

  const LocalFrame f = LocalFrame::at(light);
  double best = 1e9, expect = 0.0;
  for (const auto& p : poses) {
    if (to_vehicle_frame(light, p).x() <= 0.0) continue;
    const double d = f.horizontal(light - p.position).norm();
    if (std::abs(d - target) < best) {
      best = std::abs(d - target);
      expect = wrap_angle(f.heading_of(p.forward()) + std::numbers::pi);
    }
  }
  EXPECT_NEAR(estimate_orientation_light(light, poses, target), expect, 1e-12);
}

TEST(Orientation, LightNeverAheadHasNoValidPose) {
  const auto track = testing::straight_track(20.0);
  try {
    estimate_orientation_light(enu(-30.0, 0.0, 5.0), track.poses());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoValidPose);
  }
}

TEST(Orientation, SignFacesBackAlongWidestView) {
  const EcefPoint c = enu(50.0, 0.0, 2.0);
  const LocalFrame f = LocalFrame::at(c);
  const Vec3 east = f.east, north = f.north;
  const std::vector<CrossSection> views{{0.6, 0.7, 0, east},
                                        {0.74, 0.7, 1, (east + 0.2 * north).normalized()},
                                        {0.74, 0.7, 2, north}};
  const double yaw = estimate_orientation_sign(c, views);
  EXPECT_NEAR(yaw, f.heading_of(-(east + 0.2 * north)), 1e-12);
}

TEST(Attributes, MajorityWithLexicographicTies) {
  const std::vector<Attributes> a{{{"state", "red"}}, {{"state", "green"}}, {{"state", "red"}},
                                  {{"type", "stop"}}, {{"type", "yield"}}};
  const auto m = majority_attributes(a);
  EXPECT_EQ(m.at("state"), "red");
  EXPECT_EQ(m.at("type"), "stop");
}

TEST(FitBox, LightFromSimulatedViews) {
  const auto track = testing::straight_track(40.0, 0.5);
  const auto rig = testing::front_rig();
  const auto truth = box_at(enu(70.0, 1.0, 5.0), {0.35, 0.35, 1.0}, std::numbers::pi);
  std::vector<Detection2D> dets;
  std::vector<Observation> obs;
  LocalizedCenter center;
  center.cls = ObjectClass::kTrafficLight;
  center.center = truth.center;
  for (std::size_t k = 0; k < track.size(); ++k) {
    const auto hull = sim::tight_hull(rig.cameras().front(), track.poses()[k], truth);
    if (!hull) continue;
    Detection2D d;
    d.frame_id = static_cast<std::int64_t>(k);
    d.timestamp = track.poses()[k].timestamp;
    d.camera_id = "front";
    d.bbox = *hull;
    d.attributes = {{"state", k < 10 ? "red" : "green"}};
    center.observations.push_back(obs.size());
    obs.push_back({dets.size(), d.frame_id, d.cls, pixel_to_ray(rig.at("front"), track.poses()[k], hull->center())});
    dets.push_back(d);
  }
  ASSERT_GT(dets.size(), 20u);
  const auto box = fit_box(center, 4, obs, dets, track, rig, BoxFitConfig{});
  ASSERT_TRUE(box);
  EXPECT_EQ(box->object_id, 4);
  EXPECT_DOUBLE_EQ(box->extent.width, box->extent.depth);
  EXPECT_NEAR(box->extent.width, 0.35, 0.35 * 0.05);
  EXPECT_NEAR(box->extent.height, 1.0, 0.05);
  // Heading is taken at the pose, so the local frames differ by meridian convergence.
  EXPECT_NEAR(std::abs(wrap_angle(box->yaw - truth.yaw)), 0.0, 1e-4);
  EXPECT_EQ(box->attributes.at("state"), "green");
}

}  // namespace
}  // namespace tmo3d
