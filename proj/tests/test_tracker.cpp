#include "blinktrack/scenario.hpp"
#include "blinktrack/tracker.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace blinktrack;

namespace {

// Box of a 1.5 m tall, 1.8 m wide object at user (x, z) seen with `pose`.
BoundingBox2D box_at(double x, double z, const ImuPose& pose = {}, ObjectClass cls = ObjectClass::car) {
  const CameraIntrinsics intr;
  const auto obs = project_observation(x, z, 1.5, pose, intr, 1.55);
  return box_from_observation(obs, obs.pixel_height * 1.2, intr, pose.pitch, cls);
}

}  // namespace

TEST(Tracker, SpawnsTracksWithSequentialIds) {
  Tracker tracker;
  const auto snaps = tracker.step({0.0, {}, {box_at(-3.0, 12.0), box_at(4.0, 20.0)}});
  ASSERT_EQ(snaps.size(), 2u);
  EXPECT_EQ(snaps[0].id, 1);
  EXPECT_EQ(snaps[1].id, 2);
  EXPECT_NEAR(snaps[0].z, 12.0, 1e-6);
  EXPECT_NEAR(snaps[0].x, -3.0, 1e-6);
  EXPECT_EQ(snaps[0].vx, 0.0);
  EXPECT_EQ(snaps[0].vz, 0.0);
  EXPECT_NEAR(tracker.tracks()[0].obj_height, 1.5, 1e-9);
  EXPECT_NEAR(snaps[0].confidence, 1.0 / (40.0 + 1e-6), 1e-12);
}

TEST(Tracker, DropsAfterMissMaxExceeded) {
  Tracker tracker;
  tracker.step({0.0, {}, {box_at(0.0, 10.0)}});
  for (int i = 1; i <= 3; ++i) {
    tracker.step({0.1 * i, {}, {}});
    ASSERT_EQ(tracker.tracks().size(), 1u) << "after " << i << " misses";
    EXPECT_EQ(tracker.tracks()[0].miss_count, i);
  }
  tracker.step({0.4, {}, {}});
  EXPECT_TRUE(tracker.tracks().empty());
  EXPECT_EQ(tracker.last_stats().dropped, 1);
}

TEST(Tracker, IgnoresDetectionsAboveHorizon) {
  Tracker tracker;
  BoundingBox2D high{300, 200, 40, 60};  // bottom at 260 < horizon 320
  tracker.step({0.0, {}, {high}});
  EXPECT_TRUE(tracker.tracks().empty());
  EXPECT_EQ(tracker.last_stats().rejected_detections, 1);
}

TEST(Tracker, DropsBeyondDmax) {
  Tracker tracker;
  tracker.step({0.0, {}, {box_at(0.0, 35.0)}});
  EXPECT_TRUE(tracker.tracks().empty());
}

TEST(Tracker, RejectsNonIncreasingTimestamps) {
  Tracker tracker;
  tracker.step({1.0, {}, {}});
  EXPECT_THROW(tracker.step({1.0, {}, {}}), std::invalid_argument);
  EXPECT_THROW(tracker.advance(0.5), std::invalid_argument);
}

TEST(Tracker, MatchedTrackResetsMissCount) {
  Tracker tracker;
  tracker.step({0.0, {}, {box_at(0.0, 15.0)}});
  tracker.step({0.1, {}, {}});
  EXPECT_EQ(tracker.tracks()[0].miss_count, 1);
  tracker.step({0.2, {}, {box_at(0.0, 14.5)}});
  ASSERT_EQ(tracker.tracks().size(), 1u);
  EXPECT_EQ(tracker.tracks()[0].miss_count, 0);
  EXPECT_EQ(tracker.last_stats().matched, 1);
}

TEST(Tracker, IdsNeverReused) {
  Tracker tracker;
  std::set<int> seen;
  int last_max = 0;
  double t = 0.0;
  for (int round = 0; round < 20; ++round) {
    tracker.step({t += 0.1, {}, {box_at(-2.0, 10.0 + round % 3)}});
    for (const auto& s : tracker.snapshots()) {
      if (!seen.count(s.id)) {
        EXPECT_GT(s.id, last_max);
        last_max = s.id;
        seen.insert(s.id);
      }
    }
    for (int k = 0; k < 4; ++k) tracker.step({t += 0.1, {}, {}});
    EXPECT_TRUE(tracker.tracks().empty());
  }
  EXPECT_EQ(seen.size(), 20u);
}

TEST(Match, SpecShapes) {
  const CameraIntrinsics intr;
  Tracker tracker;
  tracker.step({0.0, {}, {box_at(-4.0, 12.0), box_at(4.0, 12.0)}});
  const auto& tracks = tracker.tracks();

  const std::vector<BoundingBox2D> dets{box_at(4.0, 12.0), box_at(-4.0, 12.0)};
  const auto a = match(tracks, dets, {}, intr, 1.55, 0.1);
  ASSERT_EQ(a.pairs.size(), 2u);
  EXPECT_EQ(a.pairs[0], (std::pair<int, int>{1, 1}));
  EXPECT_EQ(a.pairs[1], (std::pair<int, int>{2, 0}));

  const std::vector<BoundingBox2D> far{{0, 600, 5, 5}, {600, 600, 5, 5}};
  const auto b = match(tracks, far, {}, intr, 1.55, 0.1);
  EXPECT_TRUE(b.pairs.empty());
  EXPECT_EQ(b.unmatched_tracks, (std::vector<int>{1, 2}));
  EXPECT_EQ(b.unmatched_detections, (std::vector<int>{0, 1}));

  const auto c = match({}, dets, {}, intr, 1.55, 0.1);
  EXPECT_EQ(c.unmatched_detections.size(), 2u);
}

TEST(PredictedBox, UsesProjectedHeightAndLastAspect) {
  Tracker tracker;
  const auto box = box_at(1.0, 10.0);
  tracker.step({0.0, {}, {box}});
  const auto p = predicted_box(tracker.tracks()[0], {}, CameraIntrinsics{}, 1.55);
  ASSERT_TRUE(p.has_value());
  EXPECT_NEAR(p->x, box.x, 1e-6);
  EXPECT_NEAR(p->y, box.y, 1e-6);
  EXPECT_NEAR(p->w, box.w, 1e-6);
  EXPECT_NEAR(p->h, box.h, 1e-6);

  Track behind = tracker.tracks()[0];
  behind.state.mean(1) = -5.0;
  EXPECT_FALSE(predicted_box(behind, {}, CameraIntrinsics{}, 1.55).has_value());
}

// Straight approach from 40 m, blinking every tick, detections noise-free.
TEST(Tracker, StraightApproachEstimateWithinTenPercent) {
  ScenarioConfig sc;
  sc.duration = 6.0;
  sc.head = {0.0, 5.0, 0.0, 5.0, 0.0, 0.0};
  sc.detector.box_noise_std = 0.0;
  sc.detector.car_first_detect = 30.0;
  sc.detector.car_slope = 0.5;
  sc.detector.calibration_start = 60.0;
  VehicleConfig v;
  v.x = 1.0;
  v.z = 40.0;
  v.speed = 8.0;
  sc.vehicles = {v};
  const auto g = generate(sc);

  Tracker tracker;
  bool checked = false;
  for (std::size_t k = 0; k < g.trace.frames.size(); ++k) {
    const auto snaps = tracker.step(g.trace.frames[k]);
    const auto& truth = g.truth.ticks[k].objects;
    if (truth.empty() || snaps.empty()) continue;
    if (truth[0].z <= 10.0) {
      EXPECT_NEAR(snaps[0].z, truth[0].z, 0.1 * truth[0].z);
      EXPECT_NEAR(snaps[0].vz, truth[0].vz, 1.0);
      checked = true;
      break;
    }
  }
  EXPECT_TRUE(checked);
}
