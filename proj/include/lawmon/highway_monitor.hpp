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
#include <string>
#include <string_view>
#include <vector>

#include "lawmon/config.hpp"
#include "lawmon/events.hpp"
#include "lawmon/rules.hpp"
#include "lawmon/world.hpp"

namespace lawmon {

/// Highway judgements. Each formula is true on a violating frame; the atoms
/// are computed per frame by HighwayMonitor.
inline constexpr std::string_view kHighwayRules = R"(# Article 78: speed limits on the main carriageway
art78_SpeedViolation = tSpeedLimit && !speedCompliance

# Article 80: following distance
art80_FollowingViolation = tKeepFollowing && !followingCompliance

# Article 82.3: staying on a lane line
art82_3_LngTmOnLine = tDriveOnLine && lngTmOnLine

# Article 44: lane changes
art44_FrontViolation = (tChangeLeft || tChangeRight) && frontViolation
art44_RearLeftViolation = tChangeLeft && rearLeftViolation
art44_FrontLeftViolation = tChangeLeft && frontLeftViolation
art44_RearRightViolation = tChangeRight && rearRightViolation
art44_FrontRightViolation = tChangeRight && frontRightViolation
art44_LngTmOnLine = (tChangeLeft || tChangeRight) && lngTmOnLine

# Article 47: overtaking, stage 1 (leaving), stage 2 (passing), stage 3 (returning)
art47_FrontnotOvertake = tOvertake1 && !frontNotOvertake
art47_FrontViolation = (tOvertake1 || tOvertake3) && frontViolation
art47_RearLeftViolation = tOvertake1 && rearLeftViolation
art47_FrontLeftViolation = tOvertake1 && frontLeftViolation
art47_RearRightViolation = tOvertake3 && rearRightViolation
art47_FrontRightViolation = tOvertake3 && frontRightViolation
art47_LngTmOnLine = (tOvertake1 || tOvertake3) && lngTmOnLine
art47_OvertakeonRight = tOvertakeR && overtakeOnRight
art47_RecommendedSpeed = tOvertake2 && !recommendedSpeed && !speedLimitConflict
)";

inline const mtl::AtomRegistry& highway_atoms() {
  static const mtl::AtomRegistry reg{
      "tSpeedLimit",       "speedCompliance",    "tKeepFollowing",      "followingCompliance", "tDriveOnLine",
      "lngTmOnLine",       "tChangeLeft",        "tChangeRight",        "frontViolation",      "rearLeftViolation",
      "frontLeftViolation", "rearRightViolation", "frontRightViolation", "tOvertake1",          "tOvertake2",
      "tOvertake3",        "tOvertakeR",         "frontNotOvertake",    "recommendedSpeed",    "speedLimitConflict",
      "overtakeOnRight"};
  return reg;
}

inline const std::vector<Rule>& default_highway_rules() {
  static const std::vector<Rule> rules = parse_rules(kHighwayRules, highway_atoms());
  return rules;
}

/// A compliance result with the values it was decided on.
struct Check {
  bool ok = true;
  Evidence evidence;
};

/// Lane-specific minimum in km/h. Lanes without a table entry use the global
/// minimum.
inline double lane_min_speed_kmh(int n_mainway, int lane, const ThresholdConfig& cfg) {
  if (n_mainway < 1) throw MonitorError("mainway frame with no mainway lanes");
  if (lane < 1 || lane > n_mainway) {
    throw MonitorError("lane " + std::to_string(lane) + " is not one of the " + std::to_string(n_mainway) +
                       " mainway lanes");
  }
  if (n_mainway >= 3) {
    if (lane == 1) return cfg.lane1_min_3plus_kmh;
    if (lane < n_mainway) return cfg.middle_min_3plus_kmh;
  } else if (n_mainway == 2 && lane == 1) {
    return cfg.lane1_min_2_kmh;
  }
  return cfg.speed_min_kmh;
}

/// Speed band check; both bounds inclusive. Thresholds are converted to m/s.
inline Check check_speed_compliance(const SceneFrame& frame, const ThresholdConfig& cfg) {
  Check c;
  double vx = frame.ego.vx;
  c.evidence["vx_kmh"] = mps_to_kmh(vx);
  if (frame.speed_sign && frame.speed_sign->active) {
    c.evidence["v_min_kmh"] = frame.speed_sign->v_min_kmh;
    c.evidence["v_max_kmh"] = frame.speed_sign->v_max_kmh;
    c.ok = vx >= kmh_to_mps(frame.speed_sign->v_min_kmh) && vx <= kmh_to_mps(frame.speed_sign->v_max_kmh);
    return c;
  }
  auto lane = lane_of(frame.ego, frame.lanes);
  if (!lane) throw MonitorError("ego is outside the mapped lanes");
  double lane_min = lane_min_speed_kmh(frame.n_mainway_lanes, *lane, cfg);
  double v_min = std::max(cfg.speed_min_kmh, lane_min);
  c.evidence["lane"] = *lane;
  c.evidence["n_mainway"] = frame.n_mainway_lanes;
  c.evidence["v_min_kmh"] = v_min;
  c.evidence["v_max_kmh"] = cfg.speed_max_kmh;
  c.ok = vx >= kmh_to_mps(cfg.speed_min_kmh) && vx <= kmh_to_mps(cfg.speed_max_kmh) && vx >= kmh_to_mps(lane_min);
  return c;
}

inline RegionAssignment regions_of(const SceneFrame& frame) {
  return frame.regions ? *frame.regions : partition_regions(frame);
}

inline const VehicleState* region_target(const SceneFrame& frame, const RegionAssignment& r, Region which) {
  auto i = r[which];
  return i ? &frame.targets[*i] : nullptr;
}

/// Following distance; strict inequalities. Vacuously true without a front target.
inline Check check_following_compliance(const SceneFrame& frame, const ThresholdConfig& cfg) {
  Check c;
  auto regions = regions_of(frame);
  const VehicleState* f = region_target(frame, regions, Region::Front);
  if (!f) return c;
  double gap = distance_longitudinal(frame.ego, *f);
  bool fast = frame.ego.vx > kmh_to_mps(cfg.follow_speed_split_kmh);
  double need = fast ? cfg.follow_gap_fast_m : cfg.follow_gap_slow_m;
  c.ok = gap > need;
  c.evidence["vx_kmh"] = mps_to_kmh(frame.ego.vx);
  c.evidence["gap_m"] = gap;
  c.evidence["required_gap_m"] = need;
  c.evidence["target_id"] = static_cast<double>(f->id);
  return c;
}

/// Time continuously spent overlapping a boundary line of the ego lane.
class OnLineTimer {
 public:
  /// Sets t_in on a rising edge and clears it on a falling edge. True iff the
  /// trigger is held and t - t_in > t_max (1e-9 s absorbs timestamp rounding).
  bool update(bool trigger, double t, double t_max) {
    if (!trigger) {
      t_in_.reset();
      return false;
    }
    if (!t_in_) t_in_ = t;
    return t - *t_in_ > t_max + 1e-9;
  }
  std::optional<double> entry_time() const { return t_in_; }
  double held(double t) const { return t_in_ ? t - *t_in_ : 0.0; }

 private:
  std::optional<double> t_in_;
};

enum class Side { Left, Right };

/// Sub-propositions of a lane change toward `side`.
struct LaneChangeJudgement {
  bool front = false;
  bool rear = false;
  bool front_side = false;
  bool lng_tm_on_line = false;
  std::optional<ActorId> front_id, rear_id, front_side_id;
  double front_ttc = kInfinity, front_gap = kInfinity;
  double rear_ttc = kInfinity, rear_gap = kInfinity;
  double side_ttc = kInfinity, side_gap = kInfinity;

  bool compliant() const { return !front && !rear && !front_side && !lng_tm_on_line; }
};

/// Each sub-proposition holds iff its region target exists and TTCX <= TTCx_min
/// or gap <= d_clmin. The rear check orients TTCX as (rear target, ego).
inline LaneChangeJudgement check_lane_change_compliance(const SceneFrame& frame, Side side, bool lng_tm_on_line,
                                                        const ThresholdConfig& cfg) {
  LaneChangeJudgement j;
  j.lng_tm_on_line = lng_tm_on_line;
  auto regions = regions_of(frame);
  const auto& ego = frame.ego;
  auto unsafe = [&](double ttc, double gap) { return ttc <= cfg.ttcx_min_s || gap <= cfg.d_clmin_m; };
  if (const auto* f = region_target(frame, regions, Region::Front)) {
    j.front_id = f->id;
    j.front_ttc = ttcx(ego, *f);
    j.front_gap = distance_longitudinal(ego, *f);
    j.front = unsafe(j.front_ttc, j.front_gap);
  }
  Region rear = side == Side::Left ? Region::RearLeft : Region::RearRight;
  Region fside = side == Side::Left ? Region::FrontLeft : Region::FrontRight;
  if (const auto* r = region_target(frame, regions, rear)) {
    j.rear_id = r->id;
    j.rear_ttc = ttcx(*r, ego);
    j.rear_gap = distance_longitudinal(*r, ego);
    j.rear = unsafe(j.rear_ttc, j.rear_gap);
  }
  if (const auto* s = region_target(frame, regions, fside)) {
    j.front_side_id = s->id;
    j.side_ttc = ttcx(ego, *s);
    j.side_gap = distance_longitudinal(ego, *s);
    j.front_side = unsafe(j.side_ttc, j.side_gap);
  }
  return j;
}

enum class OvertakeStage { Idle, Stage1, Stage2, Stage3 };

inline const char* to_string(OvertakeStage s) {
  switch (s) {
    case OvertakeStage::Idle:
      return "idle";
    case OvertakeStage::Stage1:
      return "stage1";
    case OvertakeStage::Stage2:
      return "stage2";
    default:
      return "stage3";
  }
}

/// Per-ego state carried between frames.
struct MonitorState {
  OnLineTimer on_line;
  bool prev_overtake = false;
  std::optional<int> initial_lane;
  std::optional<ActorId> overtake_target;
  double overtake_onset = 0;
  OvertakeStage stage = OvertakeStage::Idle;
  bool left_initial_lane = false;
  bool stage3_seen = false;
  bool recommended_met = false;
  bool recommended_missed = false;
  bool off_lanes = false;
};

/// Everything computed for one frame, kept for inspection.
struct HighwayFrameInfo {
  double t = 0;
  std::optional<int> lane;
  bool on_line_trigger = false;
  bool lng_tm_on_line = false;
  double on_line_s = 0;
  LaneChangeJudgement left, right;
  Check speed, following;
  bool t_change_left = false, t_change_right = false;
  bool t_overtake1 = false, t_overtake2 = false, t_overtake3 = false, t_overtake_r = false;
  bool front_not_overtake = true;
  bool recommended_speed = false, speed_limit_conflict = false, overtake_on_right = false;
  double overtake_diff_kmh = 0;
  std::optional<ActorId> overtake_target;
  std::optional<int> initial_lane;
  OvertakeStage stage = OvertakeStage::Idle;
};

/// How often each lower layer ran and how often an upper article read it.
struct LayerCounters {
  std::size_t frames = 0;
  std::size_t on_line_evals = 0;
  std::size_t lane_change_left_evals = 0;
  std::size_t lane_change_right_evals = 0;
  std::size_t consumed_by_82_3 = 0;
  std::size_t consumed_by_44 = 0;
  std::size_t consumed_by_47 = 0;
};

/// Online monitor for Articles 44, 47, 78, 80 and 82.3 over ego-frame scenes.
///
/// Layering: the on-line timer runs once per frame; both lane-change
/// judgements run once per frame on top of it; the article rules only read
/// those cached results.
class HighwayMonitor {
 public:
  HighwayMonitor(ActorId ego, const ThresholdConfig& cfg, double dt = 0.04,
                 const std::vector<Rule>& rules = default_highway_rules())
      : ego_(ego), cfg_(cfg), engine_(rules, highway_atoms(), dt, ego, cfg.debounce_s), sample_(highway_atoms(), 0) {
    validate(cfg_);
  }

  /// Evaluates one frame; returns the events (violations and advisories)
  /// that became reportable at this frame.
  std::vector<ViolationEvent> step(const SceneFrame& frame) {
    HighwayFrameInfo& in = info_;
    in = HighwayFrameInfo{};
    in.t = frame.timestamp;
    const auto& ego = frame.ego;
    const auto regions = regions_of(frame);
    const auto box = ego.box();
    in.lane = lane_of(ego, frame.lanes);
    auto line_overlap = [&](int i) {
      const Cubic* c = lane_line(frame.lanes, i);
      return c != nullptr && overlap(box, *c, cfg_.curve_step_m);
    };
    ++counters_.frames;

    // Layer 0: on-line timer.
    bool on_left = in.lane && line_overlap(*in.lane);
    bool on_right = in.lane && line_overlap(*in.lane + 1);
    in.on_line_trigger = on_left || on_right;
    in.lng_tm_on_line = st_.on_line.update(in.on_line_trigger, frame.timestamp, cfg_.t_max_cl_s);
    in.on_line_s = st_.on_line.held(frame.timestamp);
    ++counters_.on_line_evals;

    // Layer 1: lane-change judgements, both consuming the timer.
    in.left = check_lane_change_compliance(frame, Side::Left, in.lng_tm_on_line, cfg_);
    ++counters_.lane_change_left_evals;
    in.right = check_lane_change_compliance(frame, Side::Right, in.lng_tm_on_line, cfg_);
    ++counters_.lane_change_right_evals;

    // Articles 78 and 80.
    bool mainway = frame.road_type == RoadType::Mainway;
    bool t_speed = mainway && in.lane.has_value();
    if (mainway && !in.lane) {
      if (!st_.off_lanes) diag(frame.timestamp, "ego_off_lanes", "ego centre is outside the mapped lanes");
      st_.off_lanes = true;
    } else {
      st_.off_lanes = false;
    }
    if (t_speed) in.speed = check_speed_compliance(frame, cfg_);
    const VehicleState* front = region_target(frame, regions, Region::Front);
    bool t_follow = mainway && front != nullptr;
    if (t_follow) in.following = check_following_compliance(frame, cfg_);

    // Article 44 triggers.
    DecisionKind dec = frame.decision.kind;
    in.t_change_left = dec == DecisionKind::ChangeLeftlane && ego.vy > 0 && on_left;
    in.t_change_right = dec == DecisionKind::ChangeRightlane && ego.vy < 0 && on_right;

    // Article 47.
    step_overtake(frame, front, line_overlap);

    if (in.on_line_trigger) ++counters_.consumed_by_82_3;
    if (in.t_change_left || in.t_change_right || in.t_overtake1 || in.t_overtake3) ++counters_.consumed_by_44;
    if (in.t_overtake1 || in.t_overtake3) ++counters_.consumed_by_47;

    const auto& reg = highway_atoms();
    sample_.timestamp = frame.timestamp;
    auto set = [&](std::string_view name, bool v) { sample_.set(reg.id(name), v); };
    set("tSpeedLimit", t_speed);
    set("speedCompliance", in.speed.ok);
    set("tKeepFollowing", t_follow);
    set("followingCompliance", in.following.ok);
    set("tDriveOnLine", in.on_line_trigger);
    set("lngTmOnLine", in.lng_tm_on_line);
    set("tChangeLeft", in.t_change_left);
    set("tChangeRight", in.t_change_right);
    set("frontViolation", in.left.front);
    set("rearLeftViolation", in.left.rear);
    set("frontLeftViolation", in.left.front_side);
    set("rearRightViolation", in.right.rear);
    set("frontRightViolation", in.right.front_side);
    set("tOvertake1", in.t_overtake1);
    set("tOvertake2", in.t_overtake2);
    set("tOvertake3", in.t_overtake3);
    set("tOvertakeR", in.t_overtake_r);
    set("frontNotOvertake", in.front_not_overtake);
    set("recommendedSpeed", in.recommended_speed);
    set("speedLimitConflict", in.speed_limit_conflict);
    set("overtakeOnRight", in.overtake_on_right);

    std::vector<ViolationEvent> opened;
    engine_.step(sample_, [&](const Rule& r) { return evidence(r, frame); }, opened);
    finish_overtake_frame(frame, line_overlap);
    return opened;
  }

  /// Closes open events. Call once after the last frame.
  void finish() { engine_.finish(); }

  std::vector<ViolationEvent> events() const { return engine_.events(); }
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }
  const HighwayFrameInfo& last() const { return info_; }
  const LayerCounters& counters() const { return counters_; }
  const MonitorState& state() const { return st_; }
  const mtl::Sample& last_sample() const { return sample_; }
  const RuleEngine& engine() const { return engine_; }
  ActorId ego() const { return ego_; }

 private:
  template <class LineOverlap>
  void step_overtake(const SceneFrame& frame, const VehicleState* front, LineOverlap&& line_overlap) {
    HighwayFrameInfo& in = info_;
    const auto& ego = frame.ego;
    bool is_ot = frame.decision.kind == DecisionKind::Overtake;
    // Onset: P[dt,dt](Decision != Overtake) && Decision == Overtake. The first
    // frame of a stream counts as an onset so the initial lane is known.
    if (is_ot && !st_.prev_overtake) {
      reset_overtake();
      if (in.lane) {
        st_.initial_lane = in.lane;
        st_.overtake_onset = frame.timestamp;
        if (front) st_.overtake_target = front->id;
      }
    } else if (!is_ot && st_.initial_lane) {
      diag(frame.timestamp, "incomplete_overtake", "overtake decision ended before the ego returned");
      reset_overtake();
    }
    st_.prev_overtake = is_ot;
    if (!st_.initial_lane) return;

    const int il = *st_.initial_lane;
    if (!st_.overtake_target && in.lane == il && front) st_.overtake_target = front->id;
    const VehicleState* tgt = nullptr;
    if (st_.overtake_target) {
      for (const auto& t : frame.targets) {
        if (t.id == *st_.overtake_target) {
          tgt = &t;
          break;
        }
      }
    }
    in.initial_lane = il;
    in.overtake_target = st_.overtake_target;
    bool on_initial = line_overlap(il);
    in.t_overtake1 = ego.vy > 0 && on_initial;
    in.t_overtake2 = in.lane == il - 1 && !on_initial;
    bool passed = tgt && distance_longitudinal(*tgt, ego) > 0;
    in.t_overtake3 = in.lane == il - 1 && on_initial && passed && ego.vy < 0;
    in.t_overtake_r = in.lane == il;
    if (tgt) {
      const Cubic* line = lane_line(frame.lanes, il);
      bool tgt_on = line && overlap(tgt->box(), *line, cfg_.curve_step_m);
      in.front_not_overtake = !(tgt_on && tgt->vy > 0);
      double dv = kmh_to_mps(cfg_.delta_v_ot_kmh);
      in.overtake_diff_kmh = mps_to_kmh(ego.vx - tgt->vx);
      in.recommended_speed = ego.vx - tgt->vx > dv;
      double v_max = frame.speed_sign && frame.speed_sign->active ? frame.speed_sign->v_max_kmh : cfg_.speed_max_kmh;
      in.speed_limit_conflict = tgt->vx + dv > kmh_to_mps(v_max);
    } else {
      // Without a target there is nothing to pass, so no advisory.
      in.speed_limit_conflict = true;
    }
    in.overtake_on_right = line_overlap(il + 1) && ego.vy < 0;

    if (in.t_overtake1) st_.stage = OvertakeStage::Stage1;
    if (in.t_overtake2) st_.stage = OvertakeStage::Stage2;
    if (in.t_overtake3) {
      st_.stage = OvertakeStage::Stage3;
      st_.stage3_seen = true;
    }
    if (in.lane == il - 1) st_.left_initial_lane = true;
    if (in.t_overtake2) {
      if (in.recommended_speed) st_.recommended_met = true;
      if (!in.recommended_speed && !in.speed_limit_conflict) st_.recommended_missed = true;
    }
    in.stage = st_.stage;
  }

  template <class LineOverlap>
  void finish_overtake_frame(const SceneFrame& frame, LineOverlap&& line_overlap) {
    if (!st_.initial_lane) return;
    const int il = *st_.initial_lane;
    const HighwayFrameInfo& in = info_;
    bool settled = in.lane == il && !line_overlap(il);
    if (st_.stage3_seen && settled) {
      std::string msg = st_.recommended_missed ? "recommended speed difference not reached"
                        : st_.recommended_met  ? "recommended speed difference satisfied"
                                               : "recommended speed not assessed";
      diag(frame.timestamp, "overtake_completed", msg);
      reset_overtake();
    } else if (st_.left_initial_lane && !st_.stage3_seen && settled) {
      diag(frame.timestamp, "incomplete_overtake", "returned to the initial lane without passing the target");
      reset_overtake();
    } else if (frame.timestamp - st_.overtake_onset > cfg_.overtake_timeout_s) {
      diag(frame.timestamp, "incomplete_overtake", "overtake not completed within the timeout");
      reset_overtake();
    }
  }

  void reset_overtake() {
    st_.initial_lane.reset();
    st_.overtake_target.reset();
    st_.stage = OvertakeStage::Idle;
    st_.left_initial_lane = false;
    st_.stage3_seen = false;
    st_.recommended_met = false;
    st_.recommended_missed = false;
  }

  void diag(double t, std::string code, std::string msg) {
    diags_.push_back({ego_, t, std::move(code), std::move(msg)});
  }

  Evidence evidence(const Rule& r, const SceneFrame& frame) const {
    const HighwayFrameInfo& in = info_;
    Evidence e;
    auto add_pair = [&](std::optional<ActorId> id, double ttc, double gap) {
      if (id) e["target_id"] = static_cast<double>(*id);
      e["ttcx_s"] = ttc;
      e["gap_m"] = gap;
    };
    const LaneChangeJudgement& lc = (in.t_change_right || in.t_overtake3) ? in.right : in.left;
    const std::string& s = r.sub_rule;
    if (s == "SpeedViolation") {
      e = in.speed.evidence;
    } else if (s == "FollowingViolation") {
      e = in.following.evidence;
    } else if (s == "LngTmOnLine") {
      e["on_line_s"] = in.on_line_s;
    } else if (s == "FrontViolation") {
      add_pair(lc.front_id, lc.front_ttc, lc.front_gap);
    } else if (s == "RearLeftViolation") {
      add_pair(in.left.rear_id, in.left.rear_ttc, in.left.rear_gap);
    } else if (s == "FrontLeftViolation") {
      add_pair(in.left.front_side_id, in.left.side_ttc, in.left.side_gap);
    } else if (s == "RearRightViolation") {
      add_pair(in.right.rear_id, in.right.rear_ttc, in.right.rear_gap);
    } else if (s == "FrontRightViolation") {
      add_pair(in.right.front_side_id, in.right.side_ttc, in.right.side_gap);
    } else if (s == "FrontnotOvertake") {
      if (in.overtake_target) e["target_id"] = static_cast<double>(*in.overtake_target);
    } else if (s == "OvertakeonRight") {
      e["vy_mps"] = frame.ego.vy;
    } else if (s == "RecommendedSpeed") {
      e["diff_kmh"] = in.overtake_diff_kmh;
      e["required_kmh"] = cfg_.delta_v_ot_kmh;
    }
    if (r.article == "47" && in.initial_lane) {
      e["initial_lane"] = *in.initial_lane;
      e["stage"] = static_cast<double>(in.stage);
    }
    if (in.lane && !e.count("lane")) e["lane"] = *in.lane;
    return e;
  }

  ActorId ego_;
  ThresholdConfig cfg_;
  RuleEngine engine_;
  mtl::Sample sample_;
  MonitorState st_;
  HighwayFrameInfo info_;
  LayerCounters counters_;
  std::vector<Diagnostic> diags_;
};

}  // namespace lawmon
