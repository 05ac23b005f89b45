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

#pragma once

#include <vector>

#include "lawmon/world.hpp"

namespace lawmon::testing {

/// Straight road along +x. Lane i lies between line_y[i-1] (left) and
/// line_y[i] (right); lane 1 is the top lane.
struct StraightRoad {
  std::vector<double> line_y{0.0, -3.75, -7.5, -11.25};
  int n_mainway = 3;
  RoadType type = RoadType::Mainway;

  double lane_center(int lane) const { return (line_y[lane - 1] + line_y[lane]) / 2; }
};

inline VehicleState vehicle(ActorId id, double x, double y, double vx_kmh, double vy = 0, double length = 4.8,
                            double width = 1.9) {
  VehicleState v;
  v.id = id;
  v.x = x;
  v.y = y;
  v.vx = kmh_to_mps(vx_kmh);
  v.vy = vy;
  v.length = length;
  v.width = width;
  return v;
}

/// Ego-frame scene: translation only, the road runs along the x axis.
inline SceneFrame make_frame(const StraightRoad& road, const VehicleState& ego, const std::vector<VehicleState>& others,
                             double t, DecisionKind decision = DecisionKind::KeepLane) {
  SceneFrame f;
  f.timestamp = t;
  Pose origin{ego.x, ego.y, 0.0};
  f.frame_origin = origin;
  f.ego = to_local(ego, origin);
  for (const auto& o : others) {
    if (o.id != ego.id) f.targets.push_back(to_local(o, origin));
  }
  for (std::size_t i = 0; i + 1 < road.line_y.size(); ++i) {
    LaneGeometry l;
    l.lane_id = static_cast<int>(i) + 1;
    l.left = Cubic{road.line_y[i] - ego.y, 0, 0, 0, -200, 200};
    l.right = Cubic{road.line_y[i + 1] - ego.y, 0, 0, 0, -200, 200};
    l.left_type = i == 0 ? LineType::Solid : LineType::Dashed;
    l.right_type = i + 2 == road.line_y.size() ? LineType::Solid : LineType::Dashed;
    f.lanes.push_back(l);
  }
  f.road_type = road.type;
  f.n_mainway_lanes = road.n_mainway;
  f.decision = {decision, t};
  f.regions = partition_regions(f);
  return f;
}

// Scripted overtake in lane 2 past a slower car.
struct OvertakeScript {
  double ego_kmh = 112, tgt_kmh = 92;
  double start_gap = 110;   // bumper gap at t = 0
  double vy = 2.0;          // lateral speed during the two lane changes
  double return_gap = 25;   // ego rear ahead of target front before returning
  double drift_right = 0;   // if > 0, drift right in lane 2 instead of leaving
  double dt = 0.04;
  StraightRoad road;

  std::vector<SceneFrame> frames(DecisionKind decision = DecisionKind::Overtake) const {
    std::vector<SceneFrame> out;
    const double l = 4.8;
    double ego_x = 0, tgt_x = l + start_gap;
    double y = road.lane_center(2);
    int phase = 0;  // 0 leaving, 1 passing, 2 returning, 3 done
    double vy_now = vy;
    int settle = 0;
    for (int k = 0; k < 2000 && phase < 4; ++k) {
      double t = k * dt;
      if (drift_right > 0) {
        vy_now = -drift_right;
      } else if (phase == 0) {
        vy_now = vy;
        if (y >= road.lane_center(1)) {
          y = road.lane_center(1);
          phase = 1;
          vy_now = 0;
        }
      } else if (phase == 1) {
        vy_now = 0;
        if ((ego_x - l / 2) - (tgt_x + l / 2) >= return_gap) phase = 2;
      } else if (phase == 2) {
        vy_now = -vy;
        if (y <= road.lane_center(2)) {
          y = road.lane_center(2);
          vy_now = 0;
          phase = 3;
        }
      } else if (phase == 3) {
        vy_now = 0;
        if (++settle > 40) phase = 4;
      }
      auto ego = vehicle(1, ego_x, y, ego_kmh, vy_now, l);
      auto tgt = vehicle(2, tgt_x, road.lane_center(2), tgt_kmh, 0, l);
      out.push_back(make_frame(road, ego, {tgt}, t, decision));
      ego_x += kmh_to_mps(ego_kmh) * dt;
      tgt_x += kmh_to_mps(tgt_kmh) * dt;
      y += vy_now * dt;
      if (drift_right > 0 && k > 100) break;
    }
    return out;
  }
};

}  // namespace lawmon::testing
