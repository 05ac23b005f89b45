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

// Scripted recordings and maps for demos, samples and acceptance runs.

#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lawmon/dataset_io.hpp"
#include "lawmon/intersection_map.hpp"

namespace lawmon::synthetic {

// ---------------------------------------------------------------------------
// Highway

/// Lane line i (1-based) of a straight road along +x.
inline double line_y(int i, double w = 3.75) { return -(i - 1) * w; }
inline double lane_center(int lane, double w = 3.75) { return -(lane - 0.5) * w; }

inline Json straight_highway_json(int n_lanes = 3, double length = 3000, double w = 3.75) {
  Json lines = Json::array(), lanes = Json::array();
  for (int i = 1; i <= n_lanes + 1; ++i) {
    bool edge = i == 1 || i == n_lanes + 1;
    lines.push_back({{"id", i},
                     {"type", edge ? "solid" : "dashed"},
                     {"points", {{-200.0, line_y(i, w)}, {length, line_y(i, w)}}}});
  }
  for (int i = 1; i <= n_lanes; ++i) lanes.push_back({{"id", i}, {"road_type", "M"}});
  return Json{{"type", "highway"}, {"lane_lines", lines}, {"lanes", lanes}, {"n_mainway_lanes", n_lanes}};
}

inline HighwayMap straight_highway(int n_lanes = 3, double length = 3000, double w = 3.75) {
  return parse_highway_map(straight_highway_json(n_lanes, length, w));
}

/// Position and velocity of one actor as a function of time.
struct Track {
  ActorId id = 0;
  std::function<void(double, ActorSample&)> at;
  double t_begin = 0;
  double t_end = kInfinity;
  double length = 4.8;
  double width = 1.9;
};

inline Track cruiser(ActorId id, double x0, double y, double v) {
  return {id, [=](double t, ActorSample& s) {
            s.x = x0 + v * t;
            s.y = y;
            s.vx = v;
          }};
}

/// Cosine lateral profile from y0 to y1 over [t0, t0 + T] at constant speed.
inline Track lane_changer(ActorId id, double x0, double v, double y0, double y1, double t0, double T) {
  return {id, [=](double t, ActorSample& s) {
            double u = std::clamp((t - t0) / T, 0.0, 1.0);
            s.x = x0 + v * t;
            s.vx = v;
            s.y = y0 + (y1 - y0) * (1 - std::cos(kPi * u)) / 2;
            s.vy = t > t0 && t < t0 + T ? (y1 - y0) * kPi / (2 * T) * std::sin(kPi * u) : 0.0;
          }};
}

/// Samples tracks at `hz` for `seconds`. Heading follows the velocity.
inline Recording record(const std::vector<Track>& tracks, double seconds, double hz, std::string fragment = "") {
  Recording rec;
  rec.fragment_id = std::move(fragment);
  rec.rate_hz = hz;
  const long n = std::lround(seconds * hz);
  for (long k = 0; k < n; ++k) {
    RecordedFrame f;
    f.frame = k;
    f.t = static_cast<double>(k) / hz;
    for (const auto& tr : tracks) {
      if (f.t < tr.t_begin - 1e-9 || f.t > tr.t_end + 1e-9) continue;
      ActorSample s;
      s.id = tr.id;
      s.length = tr.length;
      s.width = tr.width;
      tr.at(f.t, s);
      if (s.cls != ActorClass::Pedestrian) s.heading = std::atan2(s.vy, s.vx);
      f.actors.push_back(s);
    }
    std::sort(f.actors.begin(), f.actors.end(), [](const ActorSample& a, const ActorSample& b) { return a.id < b.id; });
    rec.frames.push_back(std::move(f));
  }
  return rec;
}

/// Ids in the illegal-highway-examples recording.
namespace fig9 {
inline constexpr ActorId kSlowLane1 = 1;     // 58 km/h in lane 1
inline constexpr ActorId kCloseFollower = 3;  // 70.24 km/h, 8.12 m behind its leader
inline constexpr ActorId kLaneChanger = 5;   // lane 3 to lane 2 with a close rear-left car
inline constexpr ActorId kLeader = 4;
inline constexpr ActorId kRearLeft = 6;
inline const std::vector<ActorId> kControls{2, 7, 8};
inline constexpr double kChangeStart = 3.0;
inline constexpr double kChangeDuration = 4.0;
}  // namespace fig9

/// Three-lane mainway, 25 Hz, 10 s. Three offenders, their two partners, and
/// three compliant controls (lane 1 at 115 km/h, lane 2 at 100 km/h, lane 3 at
/// 80 km/h) far enough from everyone else.
inline Recording fig9_recording() {
  using namespace fig9;
  auto kmh = [](double v) { return kmh_to_mps(v); };
  std::vector<Track> t;
  t.push_back(cruiser(kSlowLane1, 0, lane_center(1), kmh(58)));
  t.push_back(cruiser(2, 300, lane_center(1), kmh(115)));
  t.push_back(cruiser(kCloseFollower, 0, lane_center(3), kmh(70.24)));
  t.push_back(cruiser(kLeader, 4.8 + 8.12, lane_center(3), kmh(70.24)));
  // The changer starts its lateral move at t = 3 s with the rear-left car
  // 8 m behind (bumper to bumper) and 5 km/h slower.
  const double x5 = 1000, v5 = kmh(110), v6 = kmh(105);
  t.push_back(lane_changer(kLaneChanger, x5, v5, lane_center(3), lane_center(2), kChangeStart, kChangeDuration));
  double x6_at_start = x5 + v5 * kChangeStart - 4.8 - 8.0;
  t.push_back(cruiser(kRearLeft, x6_at_start - v6 * kChangeStart, lane_center(2), v6));
  t.push_back(cruiser(7, 400, lane_center(2), kmh(100)));
  t.push_back(cruiser(8, 300, lane_center(3), kmh(80)));
  return record(t, 10.0, 25.0, "fig9_highway");
}

/// Dense traffic for throughput runs: `actors` vehicles on three lanes with
/// occasional lane changes, deterministic for a given seed.
inline Recording dense_recording(int frames = 5000, int actors = 50, unsigned seed = 2026, double hz = 25) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> speed(kmh_to_mps(90), kmh_to_mps(115));
  std::uniform_real_distribution<double> when(5, static_cast<double>(frames) / hz - 10);
  std::vector<Track> t;
  for (int i = 0; i < actors; ++i) {
    int lane = 1 + i % 3;
    double x0 = 40.0 * (i / 3);
    double v = speed(rng);
    if (i % 5 == 4) {
      int to = lane == 3 ? 2 : lane + 1;
      t.push_back(lane_changer(100 + i, x0, v, lane_center(lane), lane_center(to), when(rng), 4.0));
    } else {
      t.push_back(cruiser(100 + i, x0, lane_center(lane), v));
    }
  }
  double seconds = frames / hz;
  return record(t, seconds, hz, "dense");
}

// ---------------------------------------------------------------------------
// Intersection

/// Symmetric junction: two entry and two exit lanes per road, stop lines at
/// distance `half` from the origin. Road 1 comes from the south heading north
/// (+y); the other roads are quarter turns of it, counter-clockwise. Each road
/// has a crosswalk one lane width deep just upstream of its stop line and a
/// light channel "phase<road>".
inline IntersectionMap symmetric_junction(double half = 12.0, double w = 3.5, bool lane_markings = false,
                                          double approach = 60.0) {
  std::vector<MapRoad> roads;
  std::vector<Crosswalk> cws;
  for (int r = 1; r <= 4; ++r) {
    double a = (r - 1) * kPi / 2;
    auto R = [&](Vec2 p) { return rotate(p, a); };
    MapRoad road;
    road.road_id = r;
    road.light_channel = "phase" + std::to_string(r);
    for (int k = 1; k <= 2; ++k) {
      MapLane in;
      in.lane_id = k;
      double xl = (k - 1) * w, xr = k * w;
      for (double y = -half - approach; y <= -half + 1e-9; y += approach / 6) {
        in.left.push_back(R({xl, y}));
        in.right.push_back(R({xr, y}));
      }
      if (lane_markings) {
        in.movements = k == 1 ? std::vector<DecisionKind>{DecisionKind::TurnLeft, DecisionKind::GoStraight}
                              : std::vector<DecisionKind>{DecisionKind::GoStraight, DecisionKind::TurnRight};
      }
      road.entry.push_back(in);
      MapLane out;
      out.lane_id = k;
      for (double y = -half; y >= -half - approach - 1e-9; y -= approach / 6) {
        out.left.push_back(R({-(k - 1) * w, y}));
        out.right.push_back(R({-k * w, y}));
      }
      road.exit.push_back(out);
    }
    road.stop_line = {R({0, -half}), R({2 * w, -half})};
    roads.push_back(road);
    Crosswalk cw;
    cw.id = r;
    cw.poly.pts = {R({-2 * w, -half - w}), R({2 * w, -half - w}), R({2 * w, -half}), R({-2 * w, -half})};
    cws.push_back(cw);
  }
  return IntersectionMap(roads, cws, w);
}

/// Entry lane centreline, virtual lane, exit lane centreline.
inline Path junction_route(const IntersectionMap& map, int road_in, int lane_in, DecisionKind d) {
  int ro = exit_road(road_in, d);
  int lo = map.matched_exit_lane(road_in, lane_in, d);
  Polyline pts = map.entry_lane(road_in, lane_in).centerline();
  auto turn = map.virtual_lane(road_in, lane_in, ro, lo, map.lane_width() / 2).center.points();
  pts.insert(pts.end(), turn.begin() + 1, turn.end());
  auto out = map.exit_lane(ro, lo).centerline();
  pts.insert(pts.end(), out.begin() + 1, out.end());
  return Path(pts);
}

/// `route` pushed sideways by offset * sin over the stations (from, to).
inline Path swung_path(const Path& route, double from, double to, double offset) {
  Polyline pts;
  for (double s = 0; s <= route.length(); s += 0.5) {
    Vec2 p = route.at(s);
    if (s > from && s < to) {
      Vec2 n = rotate(route.tangent(s), kPi / 2);
      p = p + n * (offset * std::sin(kPi * (s - from) / (to - from)));
    }
    pts.push_back(p);
  }
  return Path(pts);
}

/// Constant-speed travel along a path from station s0 at t_begin; the track
/// ends with the path.
inline Track path_track(ActorId id, Path path, double s0, double speed, double t_begin = 0) {
  double t_end = speed > 0 ? t_begin + (path.length() - s0) / speed : kInfinity;
  Track tr{id, [path, s0, speed, t_begin](double t, ActorSample& s) {
             double st = s0 + speed * (t - t_begin);
             Vec2 c = path.at(st), d = path.tangent(st);
             s.x = c.x;
             s.y = c.y;
             s.vx = speed * d.x;
             s.vy = speed * d.y;
           },
           t_begin, t_end, 4.6, 1.8};
  return tr;
}

inline std::vector<LightSample> steady_lights(TrafficLight state) {
  std::vector<LightSample> out;
  for (int r = 1; r <= 4; ++r) out.push_back({0.0, "phase" + std::to_string(r), state});
  return out;
}

struct IntersectionScenario {
  std::string name;
  Recording rec;
  std::vector<std::string> expected;  // "article/sub_rule", in order
};

/// Scripted illegal intersection examples and one legal control, 10 Hz, on
/// symmetric_junction(). Every vehicle drives from its entry lane to its exit
/// lane so the movement is inferred from the route.
inline std::vector<IntersectionScenario> fig10_scenarios(const IntersectionMap& map) {
  const double hz = 10;
  std::vector<IntersectionScenario> out;
  auto seconds = [](const Track& t) { return std::min(t.t_end, 30.0) + 0.05; };
  {
    // Left turn in front of an opposing straight car on green.
    auto ego = path_track(1, junction_route(map, 1, 1, DecisionKind::TurnLeft), 50, 8);
    auto opp = path_track(42, junction_route(map, 3, 1, DecisionKind::GoStraight), 45, 10);
    auto rec = record({ego, opp}, std::max(seconds(ego), seconds(opp)), hz, "left_turn_obstructs");
    rec.lights = steady_lights(TrafficLight::Green);
    out.push_back({"left_turn_obstructs_straight", rec, {"38.3/ViolationRightofWay"}});
  }
  {
    // Left turn swung 4 m outward across the arc.
    Path r = junction_route(map, 1, 1, DecisionKind::TurnLeft);
    auto ego = path_track(1, swung_path(r, 60, 60 + 13.75 * kPi / 2, 4.0), 50, 8);
    auto rec = record({ego}, seconds(ego), hz, "wide_turn");
    rec.lights = steady_lights(TrafficLight::Green);
    out.push_back({"wide_turn_leaves_corridors", rec, {"38.2/VirtualLane"}});
  }
  {
    auto ego = path_track(1, junction_route(map, 1, 1, DecisionKind::GoStraight), 40, 10);
    auto rec = record({ego}, seconds(ego), hz, "red_straight");
    rec.lights = steady_lights(TrafficLight::Red);
    out.push_back({"straight_on_red", rec, {"38.1/IllegalPass"}});
  }
  {
    auto ego = path_track(1, junction_route(map, 2, 2, DecisionKind::GoStraight), 40, 10);
    auto rec = record({ego}, seconds(ego), hz, "yellow_entry");
    rec.lights = steady_lights(TrafficLight::Yellow);
    out.push_back({"straight_on_yellow_entry", rec, {"38.1/IllegalPass"}});
  }
  {
    auto ego = path_track(1, junction_route(map, 1, 2, DecisionKind::TurnRight), 50, 6);
    auto rec = record({ego}, seconds(ego), hz, "right_on_red");
    rec.lights = steady_lights(TrafficLight::Red);
    out.push_back({"right_turn_on_red_empty_check_area", rec, {}});
  }
  return out;
}

}  // namespace lawmon::synthetic
