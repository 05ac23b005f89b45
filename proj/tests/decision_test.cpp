// Copyright 2026 The lawmon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>

#include "fixtures/scenarios.hpp"
#include "lawmon/decision_inference.hpp"

namespace lawmon {
namespace {

using testing::make_frame;
using testing::StraightRoad;
using testing::vehicle;

TEST(HighwayDecision, Examples) {
  StraightRoad road;
  ThresholdConfig cfg;
  double y = road.lane_center(2);
  auto ego = vehicle(1, 0, y, 100, 0.3);
  EXPECT_EQ(raw_highway_decision(make_frame(road, ego, {}, 0), cfg), DecisionKind::ChangeLeftlane);

  // Front target 5 m/s slower with a 60 m bumper gap: TTCX = 12 s.
  double v = 25;
  auto ego2 = vehicle(1, 0, y, mps_to_kmh(v), 0.3);
  auto front = vehicle(2, 60 + 4.8, y, mps_to_kmh(v - 5));
  auto f = make_frame(road, ego2, {front}, 0);
  ASSERT_NEAR(ttcx(f.ego, f.targets[0]), 12.0, 1e-9);
  EXPECT_EQ(raw_highway_decision(f, cfg), DecisionKind::Overtake);

  auto still = vehicle(1, 0, y, 100, 0.0);
  EXPECT_EQ(raw_highway_decision(make_frame(road, still, {front}, 0), cfg), DecisionKind::KeepLane);
  auto right = vehicle(1, 0, y, 100, -0.3);
  EXPECT_EQ(raw_highway_decision(make_frame(road, right, {}, 0), cfg), DecisionKind::ChangeRightlane);
}

TEST(HighwayDecision, OvertakeNeedsAClosingFrontTargetWithinTheHorizon) {
  StraightRoad road;
  ThresholdConfig cfg;
  double y = road.lane_center(2);
  auto ego = vehicle(1, 0, y, 90, 0.4);
  auto faster = vehicle(2, 40, y, 100);
  EXPECT_EQ(raw_highway_decision(make_frame(road, ego, {faster}, 0), cfg), DecisionKind::ChangeLeftlane);
  // 1 km/h slower, 200 m ahead: TTCX far beyond 20 s.
  auto distant = vehicle(2, 200, y, 89);
  EXPECT_EQ(raw_highway_decision(make_frame(road, ego, {distant}, 0), cfg), DecisionKind::ChangeLeftlane);
  // Slower target in the next lane is not in front.
  auto beside = vehicle(2, 40, road.lane_center(1), 60);
  EXPECT_EQ(raw_highway_decision(make_frame(road, ego, {beside}, 0), cfg), DecisionKind::ChangeLeftlane);
}

TEST(HighwayDecision, MirroringLateralVelocitySwapsSides) {
  StraightRoad road;
  ThresholdConfig cfg;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> vy(-1.5, 1.5), gap(5, 150), sp(60, 130);
  auto mirror = [](DecisionKind k) {
    if (k == DecisionKind::ChangeLeftlane) return DecisionKind::ChangeRightlane;
    if (k == DecisionKind::ChangeRightlane) return DecisionKind::ChangeLeftlane;
    return k;
  };
  for (int i = 0; i < 2000; ++i) {
    double y = road.lane_center(2), v = vy(rng);
    std::vector<VehicleState> others{vehicle(2, gap(rng), y, sp(rng))};
    auto a = make_frame(road, vehicle(1, 0, y, sp(rng), v), others, 0);
    auto b = a;
    b.ego.vy = -v;
    ASSERT_EQ(raw_highway_decision(b, cfg), mirror(raw_highway_decision(a, cfg)));
  }
}

/// Ego drifting laterally at a scripted vy; returns the decision per frame.
std::vector<DecisionKind> drive(const std::function<double(double)>& vy_of, double y0, double seconds,
                                std::vector<VehicleState> others = {}) {
  StraightRoad road;
  ThresholdConfig cfg;
  HighwayDecisionInference inf(cfg);
  std::vector<DecisionKind> out;
  double y = y0, x = 0;
  const double dt = 0.04;
  for (int k = 0; k * dt < seconds; ++k) {
    double t = k * dt;
    double vy = vy_of(t);
    auto ego = vehicle(1, x, y, 100, vy);
    for (auto& o : others) o.x += o.vx * dt;
    out.push_back(inf.update(make_frame(road, ego, others, t)).kind);
    y += vy * dt;
    x += ego.vx * dt;
  }
  return out;
}

TEST(HighwayDecision, LatchSurvivesTransientDips) {
  StraightRoad road;
  // Lane 2 to lane 1 at 0.5 m/s with a 0.3 s dip to 0.1 m/s early on.
  auto vy = [](double t) {
    if (t >= 2.0 && t < 2.3) return 0.1;
    return t < 7.8 ? 0.5 : 0.0;
  };
  auto d = drive(vy, road.lane_center(2), 12);
  // The right edge clears the line (y > -2.8) at t = (2.825 + 0.12) / 0.5 =
  // 5.89 s; the latch releases 0.5 s later.
  for (std::size_t k = 0; k < d.size(); ++k) {
    double t = k * 0.04;
    if (t < 6.3) ASSERT_EQ(d[k], DecisionKind::ChangeLeftlane) << "t=" << t;
  }
  // Still drifting after the release, so the next reading latches a new
  // change; it ends once the lateral motion stops.
  EXPECT_EQ(d[static_cast<std::size_t>(6.44 / 0.04)], DecisionKind::KeepLane);
  EXPECT_EQ(d.back(), DecisionKind::KeepLane);
}

TEST(HighwayDecision, AbortedChangeReleasesAfterSettleTime) {
  StraightRoad road;
  auto vy = [](double t) { return t < 0.4 ? 0.5 : 0.0; };
  auto d = drive(vy, road.lane_center(2), 2);
  EXPECT_EQ(d[5], DecisionKind::ChangeLeftlane);
  // Line never touched; KeepLane readings from t = 0.4 release at t = 0.9.
  EXPECT_EQ(d[static_cast<std::size_t>(0.84 / 0.04)], DecisionKind::ChangeLeftlane);
  EXPECT_EQ(d[static_cast<std::size_t>(0.92 / 0.04)], DecisionKind::KeepLane);
}

TEST(HighwayDecision, LatchTimesOut) {
  StraightRoad road;
  // Creeps onto the line and stays there.
  auto vy = [](double t) { return t < 3.5 ? 0.5 : 0.0; };
  auto d = drive(vy, road.lane_center(2), 20);
  EXPECT_EQ(d[static_cast<std::size_t>(14.8 / 0.04)], DecisionKind::ChangeLeftlane);
  EXPECT_EQ(d[static_cast<std::size_t>(15.2 / 0.04)], DecisionKind::KeepLane);
}

TEST(HighwayDecision, OvertakeHoldsUntilBackInTheStartLane) {
  StraightRoad road;
  // Out to lane 1, along it, and back to lane 2. A slow car ahead makes the
  // first lateral reading an overtake.
  auto vy = [](double t) {
    if (t < 7.5) return 0.5;
    if (t < 10) return 0.0;
    if (t < 17.5) return -0.5;
    return 0.0;
  };
  std::vector<VehicleState> others{vehicle(2, 60, road.lane_center(2), 80)};
  auto d = drive(vy, road.lane_center(2), 20, others);
  EXPECT_EQ(d[0], DecisionKind::Overtake);
  // Back in lane 2 clear of the line (y < -4.7) from t = 10 + 2.825 / 0.5 =
  // 15.65 s; released 0.5 s later. Settling in lane 1 on the way does not count.
  for (std::size_t k = 0; k < static_cast<std::size_t>(16.0 / 0.04); ++k) ASSERT_EQ(d[k], DecisionKind::Overtake) << k;
  EXPECT_NE(d[static_cast<std::size_t>(16.28 / 0.04)], DecisionKind::Overtake);
  EXPECT_EQ(d.back(), DecisionKind::KeepLane);
}

bool literal_straight(int i, int o) { return o == i + 2 || o == i - 2; }
bool literal_left(int i, int o) { return o == i + 3 || o == i - 1; }
bool literal_right(int i, int o) { return o == i + 1 || o == i - 3; }

TEST(IntersectionDecision, DisjunctionsPartitionAllPairs) {
  for (int i = 1; i <= 4; ++i) {
    for (int o = 1; o <= 4; ++o) {
      if (i == o) {
        EXPECT_THROW(infer_intersection_decision(i, o), InputError);
        continue;
      }
      int hits = literal_straight(i, o) + literal_left(i, o) + literal_right(i, o);
      ASSERT_EQ(hits, 1) << i << "->" << o;
      DecisionKind want = literal_straight(i, o) ? DecisionKind::GoStraight
                          : literal_left(i, o)   ? DecisionKind::TurnLeft
                                                 : DecisionKind::TurnRight;
      EXPECT_EQ(infer_intersection_decision(i, o), want);
    }
  }
}

TEST(IntersectionDecision, Examples) {
  EXPECT_EQ(infer_intersection_decision(1, 3), DecisionKind::GoStraight);
  EXPECT_EQ(infer_intersection_decision(4, 3), DecisionKind::TurnLeft);
  EXPECT_EQ(infer_intersection_decision(4, 1), DecisionKind::TurnRight);
  EXPECT_THROW(infer_intersection_decision(0, 2), InputError);
  EXPECT_THROW(infer_intersection_decision(1, 5), InputError);
}

}  // namespace
}  // namespace lawmon
