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

#include "lawmon/config.hpp"
#include "lawmon/world.hpp"

namespace lawmon {

/// Decision read off a single ego-frame scene, with no memory.
inline DecisionKind raw_highway_decision(const SceneFrame& frame, const ThresholdConfig& cfg) {
  const auto& ego = frame.ego;
  double thr = cfg.lane_change_vy_mps;
  RegionAssignment r = frame.regions ? *frame.regions : partition_regions(frame);
  if (auto i = r[Region::Front]) {
    const auto& f = frame.targets[*i];
    if (f.vx < ego.vx && ttcx(ego, f) < cfg.overtake_ttc_s && std::abs(ego.vy) > thr) return DecisionKind::Overtake;
  }
  if (ego.vy > thr) return DecisionKind::ChangeLeftlane;
  if (ego.vy < -thr) return DecisionKind::ChangeRightlane;
  return DecisionKind::KeepLane;
}

/// Online highway decision with a latch. A non-KeepLane decision holds until
/// the ego has touched a lane line and then sat fully inside one lane for the
/// settle time (for Overtake, back in the lane it started from), or until a
/// KeepLane reading persists for the settle time before any line was touched,
/// or until the latch times out.
class HighwayDecisionInference {
 public:
  explicit HighwayDecisionInference(const ThresholdConfig& cfg) : cfg_(cfg) {}

  Decision update(const SceneFrame& frame) {
    const double t = frame.timestamp;
    DecisionKind raw = raw_highway_decision(frame, cfg_);
    if (latch_) {
      auto lane = lane_of(frame.ego, frame.lanes);
      bool on_line = false;
      if (lane) {
        auto box = frame.ego.box();
        for (int i : {*lane, *lane + 1}) {
          const Cubic* c = lane_line(frame.lanes, i);
          if (c && overlap(box, *c, cfg_.curve_step_m)) on_line = true;
        }
      }
      bool release = false;
      double timeout = latch_->kind == DecisionKind::Overtake ? cfg_.overtake_latch_timeout_s : cfg_.latch_timeout_s;
      if (t - latch_->onset > timeout + 1e-9) release = true;
      if (on_line) {
        latch_->touched = true;
        latch_->settle_since.reset();
      } else if (latch_->touched && lane) {
        bool home = latch_->kind != DecisionKind::Overtake || lane == latch_->onset_lane;
        if (home) {
          if (!latch_->settle_since) latch_->settle_since = t;
          if (t - *latch_->settle_since >= cfg_.latch_settle_s - 1e-9) release = true;
        } else {
          latch_->settle_since.reset();
        }
      }
      if (!latch_->touched) {
        if (raw == DecisionKind::KeepLane) {
          if (!latch_->keep_since) latch_->keep_since = t;
          if (t - *latch_->keep_since >= cfg_.latch_settle_s - 1e-9) release = true;
        } else {
          latch_->keep_since.reset();
        }
      }
      if (!release) return {latch_->kind, latch_->onset};
      latch_.reset();
      // The manoeuvre just ended; a new one needs a fresh reading next frame.
      keep_onset_ = t;
      return {DecisionKind::KeepLane, t};
    }
    if (raw != DecisionKind::KeepLane) {
      latch_ = Latch{raw, t, lane_of(frame.ego, frame.lanes)};
      return {raw, t};
    }
    if (!keep_onset_) keep_onset_ = t;
    return {DecisionKind::KeepLane, *keep_onset_};
  }

  bool latched() const { return latch_.has_value(); }

 private:
  struct Latch {
    DecisionKind kind;
    double onset;
    std::optional<int> onset_lane;
    bool touched = false;
    std::optional<double> settle_since;
    std::optional<double> keep_since;
  };
  ThresholdConfig cfg_;
  std::optional<Latch> latch_;
  std::optional<double> keep_onset_;
};

/// Movement from entry and exit road ids, roads numbered counter-clockwise.
inline DecisionKind infer_intersection_decision(int road_in, int road_out) {
  auto valid = [](int r) { return r >= 1 && r <= 4; };
  if (!valid(road_in) || !valid(road_out)) {
    throw InputError("road ids must be 1..4 (got " + std::to_string(road_in) + " -> " + std::to_string(road_out) + ")");
  }
  if (road_in == road_out) throw InputError("U-turn at road " + std::to_string(road_in) + " is not a supported decision");
  if (road_out == road_in + 2 || road_out == road_in - 2) return DecisionKind::GoStraight;
  if (road_out == road_in + 3 || road_out == road_in - 1) return DecisionKind::TurnLeft;
  return DecisionKind::TurnRight;  // road_in + 1 or road_in - 3
}

}  // namespace lawmon
