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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lawmon/config.hpp"
#include "lawmon/events.hpp"
#include "lawmon/intersection_map.hpp"
#include "lawmon/rules.hpp"
#include "lawmon/world.hpp"

namespace lawmon {

/// Junction judgements for a stream sampled every `dt` seconds. The light
/// rule looks back exactly one sample.
inline std::string intersection_rules_text(double dt) {
  std::string d = format_double(dt);
  return "# Article 38: traffic lights\n"
         "art38_1_IllegalPass = tTrafficLight && !decTurnRight && P[" + d + "," + d +
         "](!egoInArea && !lightGreen) && egoInArea && !lightGreen\n"
         "\n"
         "# Article 38: virtual lanes\n"
         "art38_2_VirtualLane = tVirtualLane && !followUsual && !followUnusual\n"
         "art38_2_UnusualVirtualLane = tVirtualLane && followUnusual\n"
         "\n"
         "# Article 38: right of way\n"
         "art38_3_ViolationRightofWay = tRightOfWay && crossVStopLine && hrwInCheckArea && egoMoving\n"
         "art38_4_ImpedePedestrian = tAvoidPedestrian && impedePedestrian\n";
}

inline const mtl::AtomRegistry& intersection_atoms() {
  static const mtl::AtomRegistry reg{"tTrafficLight", "decTurnRight",   "egoInArea",      "lightGreen",
                                     "tVirtualLane",  "followUsual",    "followUnusual",  "tRightOfWay",
                                     "crossVStopLine", "hrwInCheckArea", "egoMoving",      "tAvoidPedestrian",
                                     "impedePedestrian"};
  return reg;
}

inline std::vector<Rule> default_intersection_rules(double dt) {
  return parse_rules(intersection_rules_text(dt), intersection_atoms());
}

enum class VirtualLaneStatus { Usual, Unusual, Violation };

inline const char* to_string(VirtualLaneStatus s) {
  switch (s) {
    case VirtualLaneStatus::Usual:
      return "Usual";
    case VirtualLaneStatus::Unusual:
      return "Unusual";
    default:
      return "Violation";
  }
}

inline VirtualLaneStatus check_virtual_lane(Vec2 center, const VirtualElements& ve) {
  if (ve.in_usual(center)) return VirtualLaneStatus::Usual;
  if (ve.in_unusual(center)) return VirtualLaneStatus::Unusual;
  return VirtualLaneStatus::Violation;
}

/// True when the pedestrian moves faster than the minimum speed and its
/// straight-line track over the horizon reaches `area`.
inline bool heads_toward(const PedestrianState& ped, const Polygon& area, const ThresholdConfig& cfg) {
  if (norm(ped.velocity) <= cfg.ped_min_speed_mps) return false;
  Segment track{ped.position, ped.position + ped.velocity * cfg.ped_horizon_s};
  if (contains(area, track.b)) return true;
  const auto& p = area.pts;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (intersects(track, Segment{p[i], p[(i + 1) % p.size()]})) return true;
  }
  return false;
}

struct PedestrianCheck {
  bool triggered = false;
  std::optional<std::size_t> sub_area;
  bool impede = false;
  std::optional<ActorId> pedestrian;
};

/// Pedestrian avoidance at a crosswalk sub-area. Triggered while the ego front
/// midpoint is inside a sub-area that does not contain its centre.
inline PedestrianCheck check_pedestrian(const SceneFrame& frame, const IntersectionMap& map, const ThresholdConfig& cfg) {
  PedestrianCheck out;
  Vec2 front = frame.ego.front_mid(), center = frame.ego.center();
  const auto& subs = map.sub_areas();
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (contains(subs[i].poly, front) && !contains(subs[i].poly, center)) {
      out.triggered = true;
      out.sub_area = i;
      break;
    }
  }
  if (!out.triggered) return out;
  const auto& own = subs[*out.sub_area];
  for (const auto& ped : frame.pedestrians) {
    bool hit = contains(own.poly, ped.position);
    for (std::size_t j : own.adjacent) {
      if (hit) break;
      hit = contains(subs[j].poly, ped.position) && heads_toward(ped, own.poly, cfg);
    }
    if (hit) {
      out.impede = true;
      out.pedestrian = ped.id;
      break;
    }
  }
  return out;
}

/// Movement read at a judgement line: the last inclination seen while the
/// vehicle overlapped the line of the given entry lane.
struct TargetIntent {
  int road_id = 0;
  int lane_id = 0;
  double incln = 0.0;
};

/// Targets with higher right of way than the ego whose front midpoint is in
/// the check area. `intents` holds the judgement-line readings so far.
inline std::vector<ActorId> high_right_of_way_in_check_area(const SceneFrame& frame, const VirtualElements& ve,
                                                            const std::map<ActorId, TargetIntent>& intents,
                                                            const ThresholdConfig& cfg) {
  std::vector<ActorId> out;
  if (ve.partner_road == 0) return out;
  for (const auto& t : frame.targets) {
    auto it = intents.find(t.id);
    if (it == intents.end() || it->second.road_id != ve.partner_road) continue;
    double a = it->second.incln;
    bool in_range = ve.partner_movement == DecisionKind::TurnLeft ? in_tl_range(a, cfg) : in_gs_range(a, cfg);
    if (in_range && ve.in_check_area(t.front_mid())) out.push_back(t.id);
  }
  return out;
}

struct IntersectionFrameInfo {
  double t = 0;
  bool front_in_area = false;
  bool rear_in_area = false;
  bool center_in_area = false;
  std::optional<std::pair<int, int>> entry_lane;
  std::optional<VirtualLaneStatus> virtual_lane;
  bool cross_vstopline = false;
  std::vector<ActorId> hrw_in_check_area;
  PedestrianCheck pedestrian;
};

/// Article 38 monitor for one ego stream in map coordinates.
class IntersectionMonitor {
 public:
  IntersectionMonitor(ActorId ego, const IntersectionMap& map, const ThresholdConfig& cfg, double dt = 0.1,
                      std::vector<Rule> rules = {})
      : ego_(ego),
        map_(&map),
        cfg_(cfg),
        engine_(rules.empty() ? default_intersection_rules(dt) : rules, intersection_atoms(), dt, ego, cfg.debounce_s),
        sample_(intersection_atoms(), 0) {
    validate(cfg_);
  }

  std::vector<ViolationEvent> step(const SceneFrame& frame) {
    IntersectionFrameInfo& in = info_;
    in = IntersectionFrameInfo{};
    in.t = frame.timestamp;
    const auto& ego = frame.ego;
    const IntersectionMap& map = *map_;
    Vec2 center = ego.center(), front = ego.front_mid();
    in.front_in_area = map.in_area(front);
    in.rear_in_area = map.in_area(ego.rear_mid());
    in.center_in_area = map.in_area(center);
    if (!in.center_in_area) {
      if (auto l = map.entry_lane_at(center)) entry_ = l;
    }
    in.entry_lane = entry_;
    update_intents(frame);

    // Light rule trigger: the front has entered and the rear has entered or
    // is still to enter.
    bool t_light = in.front_in_area || in.rear_in_area;
    if (t_light && !frame.traffic_light) {
      throw MonitorError("no traffic light state at t=" + format_double(frame.timestamp) + " for ego " +
                         std::to_string(ego_));
    }
    bool green = frame.traffic_light == TrafficLight::Green;
    DecisionKind dec = frame.decision.kind;

    const VirtualElements* ve = nullptr;
    if (in.center_in_area) ve = elements(frame);
    bool t_vlane = in.center_in_area && ve != nullptr;
    if (t_vlane) {
      in.virtual_lane = check_virtual_lane(center, *ve);
      in.cross_vstopline = ve->vstopline && intersects(Segment{front, center}, *ve->vstopline);
      in.hrw_in_check_area = high_right_of_way_in_check_area(frame, *ve, intents_, cfg_);
    }
    in.pedestrian = check_pedestrian(frame, map, cfg_);
    bool moving = std::abs(ego.speed_along_heading()) > cfg_.standstill_mps;

    const auto& reg = intersection_atoms();
    sample_.timestamp = frame.timestamp;
    auto set = [&](std::string_view name, bool v) { sample_.set(reg.id(name), v); };
    set("tTrafficLight", t_light);
    set("decTurnRight", dec == DecisionKind::TurnRight);
    set("egoInArea", in.center_in_area);
    set("lightGreen", green);
    set("tVirtualLane", t_vlane);
    set("followUsual", in.virtual_lane == VirtualLaneStatus::Usual);
    set("followUnusual", in.virtual_lane == VirtualLaneStatus::Unusual);
    set("tRightOfWay", t_vlane);
    set("crossVStopLine", in.cross_vstopline);
    set("hrwInCheckArea", !in.hrw_in_check_area.empty());
    set("egoMoving", moving);
    set("tAvoidPedestrian", in.pedestrian.triggered);
    set("impedePedestrian", in.pedestrian.impede);

    std::vector<ViolationEvent> opened;
    engine_.step(sample_, [&](const Rule& r) { return evidence(r, frame, ve); }, opened);
    return opened;
  }

  void finish() { engine_.finish(); }

  std::vector<ViolationEvent> events() const { return engine_.events(); }
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }
  const IntersectionFrameInfo& last() const { return info_; }
  const mtl::Sample& last_sample() const { return sample_; }
  const RuleEngine& engine() const { return engine_; }
  const std::map<ActorId, TargetIntent>& intents() const { return intents_; }
  ActorId ego() const { return ego_; }

 private:
  void update_intents(const SceneFrame& frame) {
    for (const auto& t : frame.targets) {
      auto box = t.box();
      for (const auto& jl : map_->judgement_lines()) {
        if (overlap(box, jl.seg)) intents_[t.id] = {jl.road_id, jl.lane_id, incln(t, jl.heading)};
      }
    }
  }

  /// Virtual elements for the current decision and light, built once each.
  const VirtualElements* elements(const SceneFrame& frame) {
    DecisionKind d = frame.decision.kind;
    if (is_highway_decision(d)) {
      diag_once(frame.timestamp, "decision_unknown", "no intersection movement for the ego inside the junction");
      return nullptr;
    }
    if (!entry_) {
      diag_once(frame.timestamp, "entry_lane_unknown", "ego entered the junction from outside the mapped entry lanes");
      return nullptr;
    }
    bool red = d == DecisionKind::TurnRight && frame.traffic_light == TrafficLight::Red;
    for (const auto& c : cache_) {
      if (c.decision == d && c.red == red && c.road_in == entry_->first && c.lane_in == entry_->second) {
        return c.ok ? &c.ve : nullptr;
      }
    }
    Cached c{d, red, entry_->first, entry_->second, false, {}};
    try {
      c.ve = map_->build_virtual_elements(entry_->first, entry_->second, d, red, cfg_);
      c.ok = true;
    } catch (const MonitorError& e) {
      diag(frame.timestamp, "virtual_lane_unavailable", e.what());
    }
    cache_.push_back(std::move(c));
    return cache_.back().ok ? &cache_.back().ve : nullptr;
  }

  Evidence evidence(const Rule& r, const SceneFrame& frame, const VirtualElements* ve) const {
    const auto& ego = frame.ego;
    Evidence e{{"x", ego.x}, {"y", ego.y}, {"speed_mps", ego.speed_along_heading()}};
    if (r.sub_rule == "IllegalPass" && frame.traffic_light) {
      e["light_state"] = static_cast<double>(*frame.traffic_light);
    } else if ((r.sub_rule == "VirtualLane" || r.sub_rule == "UnusualVirtualLane") && ve) {
      e["distance_to_usual_m"] = distance(ego.center(), ve->usual.center.points());
    } else if (r.sub_rule == "ViolationRightofWay" && !info_.hrw_in_check_area.empty()) {
      e["target_id"] = static_cast<double>(info_.hrw_in_check_area.front());
    } else if (r.sub_rule == "ImpedePedestrian") {
      if (info_.pedestrian.pedestrian) e["pedestrian_id"] = static_cast<double>(*info_.pedestrian.pedestrian);
      if (info_.pedestrian.sub_area) e["sub_area"] = static_cast<double>(*info_.pedestrian.sub_area);
    }
    return e;
  }

  void diag(double t, std::string code, std::string msg) { diags_.push_back({ego_, t, std::move(code), std::move(msg)}); }
  void diag_once(double t, std::string code, std::string msg) {
    for (const auto& d : diags_) {
      if (d.code == code) return;
    }
    diag(t, std::move(code), std::move(msg));
  }

  struct Cached {
    DecisionKind decision;
    bool red;
    int road_in, lane_in;
    bool ok;
    VirtualElements ve;
  };

  ActorId ego_;
  const IntersectionMap* map_;
  ThresholdConfig cfg_;
  RuleEngine engine_;
  mtl::Sample sample_;
  IntersectionFrameInfo info_;
  std::optional<std::pair<int, int>> entry_;
  std::map<ActorId, TargetIntent> intents_;
  std::vector<Cached> cache_;
  std::vector<Diagnostic> diags_;
};

}  // namespace lawmon
