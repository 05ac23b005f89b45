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

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lawmon/common.hpp"
#include "lawmon/geometry.hpp"

namespace lawmon {

enum class ActorClass { Car, Truck, Pedestrian };

inline const char* to_string(ActorClass c) {
  switch (c) {
    case ActorClass::Car:
      return "car";
    case ActorClass::Truck:
      return "truck";
    default:
      return "pedestrian";
  }
}

/// Kinematic state of a vehicle. In the ego frame vx is longitudinal and vy
/// lateral (positive to the left); in the map frame both are map axes.
struct VehicleState {
  ActorId id = 0;
  double x = 0, y = 0;
  double vx = 0, vy = 0;
  double ax = 0, ay = 0;
  double heading = 0;
  double width = 1.8;
  double length = 4.5;
  ActorClass cls = ActorClass::Car;

  Vec2 center() const { return {x, y}; }
  OrientedBox box() const { return {{x, y}, heading, length, width}; }
  Vec2 front_mid() const { return box().front_mid(); }
  Vec2 rear_mid() const { return box().rear_mid(); }
  /// Speed along the body axis, whatever frame vx/vy are expressed in.
  double speed_along_heading() const { return dot({vx, vy}, unit(heading)); }
};

/// Throws InputError unless dimensions are positive and kinematics finite.
inline void validate(const VehicleState& v) {
  for (double f : {v.x, v.y, v.vx, v.vy, v.ax, v.ay, v.heading}) {
    if (!std::isfinite(f)) throw InputError("actor " + std::to_string(v.id) + " has a non-finite state");
  }
  if (!(v.width > 0) || !(v.length > 0) || !std::isfinite(v.width) || !std::isfinite(v.length)) {
    throw InputError("actor " + std::to_string(v.id) + " has non-positive dimensions");
  }
}

struct PedestrianState {
  ActorId id = 0;
  Vec2 position;
  Vec2 velocity;
  double heading = 0;
};

enum class LineType { Solid, Dashed };

/// Lane in the ego frame. Lane ids grow outward from 1; the left boundary of
/// lane i is LaneLine(i) and the right boundary is LaneLine(i + 1).
struct LaneGeometry {
  int lane_id = 1;
  Cubic left;
  Cubic right;
  LineType left_type = LineType::Dashed;
  LineType right_type = LineType::Dashed;
};

enum class RoadType { Mainway, Ramp, Acceleration, Deceleration, Urban, Intersection };

inline const char* to_string(RoadType t) {
  switch (t) {
    case RoadType::Mainway:
      return "M";
    case RoadType::Ramp:
      return "R";
    case RoadType::Acceleration:
      return "A";
    case RoadType::Deceleration:
      return "D";
    case RoadType::Urban:
      return "urban";
    default:
      return "intersection";
  }
}

inline RoadType parse_road_type(std::string_view s) {
  if (s == "M") return RoadType::Mainway;
  if (s == "R") return RoadType::Ramp;
  if (s == "A") return RoadType::Acceleration;
  if (s == "D") return RoadType::Deceleration;
  if (s == "urban") return RoadType::Urban;
  if (s == "intersection") return RoadType::Intersection;
  throw InputError("unknown road type '" + std::string(s) + "'");
}

enum class TrafficLight { Red, Green, Yellow };

inline TrafficLight parse_light(std::string_view s) {
  if (s == "R" || s == "red") return TrafficLight::Red;
  if (s == "G" || s == "green") return TrafficLight::Green;
  if (s == "Y" || s == "yellow") return TrafficLight::Yellow;
  throw InputError("unknown traffic light state '" + std::string(s) + "'");
}

inline const char* to_string(TrafficLight l) {
  return l == TrafficLight::Red ? "R" : (l == TrafficLight::Green ? "G" : "Y");
}

enum class DecisionKind { KeepLane, ChangeLeftlane, ChangeRightlane, Overtake, GoStraight, TurnLeft, TurnRight };

inline const char* to_string(DecisionKind k) {
  switch (k) {
    case DecisionKind::KeepLane:
      return "KeepLane";
    case DecisionKind::ChangeLeftlane:
      return "ChangeLeftlane";
    case DecisionKind::ChangeRightlane:
      return "ChangeRightlane";
    case DecisionKind::Overtake:
      return "Overtake";
    case DecisionKind::GoStraight:
      return "GoStraight";
    case DecisionKind::TurnLeft:
      return "TurnLeft";
    default:
      return "TurnRight";
  }
}

inline DecisionKind parse_decision(std::string_view s) {
  for (auto k : {DecisionKind::KeepLane, DecisionKind::ChangeLeftlane, DecisionKind::ChangeRightlane,
                 DecisionKind::Overtake, DecisionKind::GoStraight, DecisionKind::TurnLeft, DecisionKind::TurnRight}) {
    if (s == to_string(k)) return k;
  }
  throw InputError("unknown decision '" + std::string(s) + "'");
}

inline bool is_highway_decision(DecisionKind k) {
  return k == DecisionKind::KeepLane || k == DecisionKind::ChangeLeftlane || k == DecisionKind::ChangeRightlane ||
         k == DecisionKind::Overtake;
}

struct Decision {
  DecisionKind kind = DecisionKind::KeepLane;
  double onset = 0.0;
  friend bool operator==(const Decision&, const Decision&) = default;
};

/// Speed-sign management area around the ego, limits in km/h.
struct SpeedSignContext {
  double v_min_kmh = 60;
  double v_max_kmh = 120;
  bool active = false;
};

enum class Region { Front, FrontLeft, FrontRight, Rear, RearLeft, RearRight };
inline constexpr std::array<Region, 6> kRegions{Region::Front,    Region::FrontLeft, Region::FrontRight,
                                               Region::Rear,     Region::RearLeft,  Region::RearRight};

inline const char* to_string(Region r) {
  switch (r) {
    case Region::Front:
      return "front";
    case Region::FrontLeft:
      return "front_left";
    case Region::FrontRight:
      return "front_right";
    case Region::Rear:
      return "rear";
    case Region::RearLeft:
      return "rear_left";
    default:
      return "rear_right";
  }
}

/// Nearest target per region, as an index into SceneFrame::targets.
struct RegionAssignment {
  std::array<std::optional<std::size_t>, 6> index{};

  std::optional<std::size_t> operator[](Region r) const { return index[static_cast<std::size_t>(r)]; }
  bool empty() const {
    for (const auto& i : index) {
      if (i) return false;
    }
    return true;
  }
};

/// Planar pose used as the origin of a local frame.
struct Pose {
  double x = 0, y = 0, heading = 0;

  Vec2 to_local(Vec2 p) const {
    double c = std::cos(heading), s = std::sin(heading);
    double dx = p.x - x, dy = p.y - y;
    return {c * dx + s * dy, -s * dx + c * dy};
  }
  Vec2 to_global(Vec2 p) const {
    double c = std::cos(heading), s = std::sin(heading);
    return {x + c * p.x - s * p.y, y + s * p.x + c * p.y};
  }
  Vec2 rotate_to_local(Vec2 v) const {
    double c = std::cos(heading), s = std::sin(heading);
    return {c * v.x + s * v.y, -s * v.x + c * v.y};
  }
  Vec2 rotate_to_global(Vec2 v) const {
    double c = std::cos(heading), s = std::sin(heading);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
  }
};

/// One timestamped snapshot as seen by a monitor.
struct SceneFrame {
  double timestamp = 0.0;
  VehicleState ego;
  std::vector<VehicleState> targets;
  std::vector<PedestrianState> pedestrians;
  std::vector<LaneGeometry> lanes;
  RoadType road_type = RoadType::Mainway;
  int n_mainway_lanes = 0;
  std::optional<SpeedSignContext> speed_sign;
  std::optional<TrafficLight> traffic_light;
  Decision decision;
  std::optional<RegionAssignment> regions;
  /// Map-frame pose of the local origin (highway frames only).
  std::optional<Pose> frame_origin;

  const VehicleState* target(Region r) const {
    if (!regions) return nullptr;
    auto i = (*regions)[r];
    return i ? &targets[*i] : nullptr;
  }
};

/// Re-expresses a map-frame state relative to `origin`.
inline VehicleState to_local(const VehicleState& g, const Pose& origin) {
  VehicleState v = g;
  Vec2 p = origin.to_local(g.center());
  Vec2 vel = origin.rotate_to_local({g.vx, g.vy});
  Vec2 acc = origin.rotate_to_local({g.ax, g.ay});
  v.x = p.x;
  v.y = p.y;
  v.vx = vel.x;
  v.vy = vel.y;
  v.ax = acc.x;
  v.ay = acc.y;
  v.heading = wrap_angle(g.heading - origin.heading);
  return v;
}

inline VehicleState to_global(const VehicleState& l, const Pose& origin) {
  VehicleState v = l;
  Vec2 p = origin.to_global(l.center());
  Vec2 vel = origin.rotate_to_global({l.vx, l.vy});
  Vec2 acc = origin.rotate_to_global({l.ax, l.ay});
  v.x = p.x;
  v.y = p.y;
  v.vx = vel.x;
  v.vy = vel.y;
  v.ax = acc.x;
  v.ay = acc.y;
  v.heading = wrap_angle(l.heading + origin.heading);
  return v;
}

/// Ego and targets expressed in the frame anchored at `origin`.
struct EgoFrameFragment {
  VehicleState ego;
  std::vector<VehicleState> targets;
};

inline EgoFrameFragment to_ego_frame(const std::vector<VehicleState>& globals, const VehicleState& ego_global,
                                     const Pose& origin) {
  EgoFrameFragment out;
  out.ego = to_local(ego_global, origin);
  out.targets.reserve(globals.size());
  for (const auto& g : globals) {
    if (g.id == ego_global.id) continue;
    out.targets.push_back(to_local(g, origin));
  }
  return out;
}

/// Frame anchored at the ego centre with the x axis along the ego heading.
inline EgoFrameFragment to_ego_frame(const std::vector<VehicleState>& globals, const VehicleState& ego_global) {
  return to_ego_frame(globals, ego_global, Pose{ego_global.x, ego_global.y, ego_global.heading});
}

inline EgoFrameFragment to_ego_frame(const std::vector<VehicleState>& globals, ActorId ego_id) {
  for (const auto& g : globals) {
    if (g.id == ego_id) return to_ego_frame(globals, g);
  }
  throw InputError("ego " + std::to_string(ego_id) + " is not present");
}

/// LaneLine(i) from a lane list, or nullptr if absent.
inline const Cubic* lane_line(const std::vector<LaneGeometry>& lanes, int i) {
  for (const auto& l : lanes) {
    if (l.lane_id == i) return &l.left;
  }
  for (const auto& l : lanes) {
    if (l.lane_id + 1 == i) return &l.right;
  }
  return nullptr;
}

/// Lane whose boundaries bracket the centre at its own station. A centre on a
/// shared line belongs to the inner (smaller id) lane.
inline std::optional<int> lane_of(Vec2 c, const std::vector<LaneGeometry>& lanes) {
  std::optional<int> best;
  for (const auto& l : lanes) {
    if (!l.left.valid_at(c.x) || !l.right.valid_at(c.x)) continue;
    double yl = l.left(c.x), yr = l.right(c.x);
    if (yr <= c.y && c.y <= yl && (!best || l.lane_id < *best)) best = l.lane_id;
  }
  return best;
}

inline std::optional<int> lane_of(const VehicleState& v, const std::vector<LaneGeometry>& lanes) {
  return lane_of(v.center(), lanes);
}

/// Bumper gap along the x axis: front's rear bumper minus rear's front bumper.
inline double distance_longitudinal(const VehicleState& rear, const VehicleState& front) {
  return (front.x - front.length / 2) - (rear.x + rear.length / 2);
}

/// Time to longitudinal collision. +inf when not closing, 0 when overlapping.
inline double ttcx(const VehicleState& rear, const VehicleState& front) {
  double gap = distance_longitudinal(rear, front);
  if (gap < 0) return 0.0;
  double closing = rear.vx - front.vx;
  if (!(closing > 0)) return kInfinity;
  return gap / closing;
}

/// Signed heading deviation from a centreline, counter-clockwise positive.
inline double incln(const VehicleState& tgt, double centerline_heading) {
  return wrap_angle(tgt.heading - centerline_heading);
}

/// Assigns each target to one of six regions by lane offset and longitudinal
/// sign (centre x >= ego x is front) and keeps the one with the smallest bumper
/// gap per region, ties to the smaller id. Targets two or more lanes away, or
/// off the mapped lanes, are excluded.
inline RegionAssignment partition_regions(const SceneFrame& frame) {
  RegionAssignment out;
  auto ego_lane = lane_of(frame.ego, frame.lanes);
  if (!ego_lane) return out;
  std::array<double, 6> best{};
  best.fill(kInfinity);
  for (std::size_t i = 0; i < frame.targets.size(); ++i) {
    const auto& t = frame.targets[i];
    auto lane = lane_of(t, frame.lanes);
    if (!lane) continue;
    int off = *lane - *ego_lane;
    if (off < -1 || off > 1) continue;
    double dx = t.x - frame.ego.x;
    bool front = dx >= 0;
    Region r = off == 0 ? (front ? Region::Front : Region::Rear)
               : off < 0 ? (front ? Region::FrontLeft : Region::RearLeft)
                         : (front ? Region::FrontRight : Region::RearRight);
    auto slot = static_cast<std::size_t>(r);
    double d = front ? distance_longitudinal(frame.ego, t) : distance_longitudinal(t, frame.ego);
    if (d < best[slot] || (d == best[slot] && out.index[slot] && t.id < frame.targets[*out.index[slot]].id)) {
      best[slot] = d;
      out.index[slot] = i;
    }
  }
  return out;
}

}  // namespace lawmon
