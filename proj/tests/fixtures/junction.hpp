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

#include <cmath>
#include <optional>
#include <vector>

#include "lawmon/intersection_map.hpp"
#include "lawmon/synthetic.hpp"
#include "lawmon/world.hpp"

namespace lawmon::testing {

/// synthetic::symmetric_junction with its parameters kept at hand.
struct Junction {
  double half = 12.0;
  double w = 3.5;
  double approach = 60.0;
  IntersectionMap map;

  explicit Junction(double half_ = 12.0, double w_ = 3.5, bool lane_markings = false)
      : half(half_), w(w_), map(synthetic::symmetric_junction(half_, w_, lane_markings, approach)) {}

  /// Full route: entry lane centreline, virtual lane, exit lane centreline.
  Path route(int road_in, int lane_in, DecisionKind d) const {
    return synthetic::junction_route(map, road_in, lane_in, d);
  }

  /// Arc length along `route` at which the vehicle centre reaches the stop line.
  double stop_station() const { return approach; }
};

inline VehicleState car_on(const Path& p, ActorId id, double s, double speed, double length = 4.6, double width = 1.8) {
  VehicleState v;
  v.id = id;
  Vec2 c = p.at(s);
  Vec2 d = p.tangent(s);
  v.x = c.x;
  v.y = c.y;
  v.heading = std::atan2(d.y, d.x);
  v.vx = speed * d.x;
  v.vy = speed * d.y;
  v.length = length;
  v.width = width;
  return v;
}

inline SceneFrame junction_frame(double t, const VehicleState& ego, std::vector<VehicleState> targets,
                                 std::optional<TrafficLight> light, DecisionKind d,
                                 std::vector<PedestrianState> peds = {}) {
  SceneFrame f;
  f.timestamp = t;
  f.ego = ego;
  f.targets = std::move(targets);
  f.pedestrians = std::move(peds);
  f.road_type = RoadType::Intersection;
  f.traffic_light = light;
  f.decision = {d, 0.0};
  return f;
}

inline VehicleState rotated(VehicleState v, double a) {
  Vec2 c = rotate({v.x, v.y}, a), vel = rotate({v.vx, v.vy}, a);
  v.x = c.x;
  v.y = c.y;
  v.vx = vel.x;
  v.vy = vel.y;
  v.heading = wrap_angle(v.heading + a);
  return v;
}

}  // namespace lawmon::testing
