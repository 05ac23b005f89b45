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

// Acceptance run. Prints one PASS/FAIL line per criterion; `acceptance N`
// runs criterion N only. Exit status is non-zero when any criterion fails.

#include <boost/math/special_functions/beta.hpp>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "fixtures/random_mtl.hpp"
#include "fixtures/scenarios.hpp"
#include "lawmon/calibration.hpp"
#include "lawmon/cli.hpp"
#include "lawmon/decision_inference.hpp"
#include "lawmon/mtl/offline.hpp"
#include "lawmon/synthetic.hpp"

namespace {

using namespace lawmon;
using Clock = std::chrono::steady_clock;

// Pinned tolerances and budgets.
constexpr double kFig9OnsetSamples = 1.0;   // onset within one sample
constexpr double kFixtureBudgetS = 1.0;      // criteria 1 and 2
constexpr double kQuantileRelTol = 0.05;     // criterion 5
constexpr double kTtcxTolS = 0.05;           // criterion 5
constexpr double kCalibrationBudgetS = 10.0;  // criterion 5
constexpr double kRealTimeFactor = 100.0;    // criterion 8

struct Result {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [" << what << "]";
    }
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::set<std::string> articles_of(const std::vector<ViolationEvent>& ev, ActorId ego) {
  std::set<std::string> out;
  for (const auto& e : ev) {
    if (e.ego_id == ego) out.insert(e.article + "/" + e.sub_rule);
  }
  return out;
}

std::vector<ViolationEvent> events_of(const std::vector<ViolationEvent>& ev, ActorId ego) {
  std::vector<ViolationEvent> out;
  for (const auto& e : ev) {
    if (e.ego_id == ego) out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// 1. Illegal highway examples

/// First recorded time at which `cond(frame)` holds, from raw samples.
std::optional<double> first_time(const Recording& rec, const std::function<bool(const RecordedFrame&)>& cond) {
  for (const auto& f : rec.frames) {
    if (cond(f)) return f.t;
  }
  return std::nullopt;
}

Result criterion1() {
  Result r;
  using namespace synthetic::fig9;
  const auto rec = synthetic::fig9_recording();
  const auto map = synthetic::straight_highway(3, 3000);
  const ThresholdConfig cfg;
  const double dt = 1.0 / rec.rate_hz;

  auto t0 = Clock::now();
  auto log = monitor_highway(rec, map, cfg, rec.vehicle_ids());
  double elapsed = seconds_since(t0);

  // Onsets from the raw samples. Lane k spans (line_y(k + 1), line_y(k)).
  auto at = [&](const RecordedFrame& f, ActorId id) { return Recording::find(f, id); };
  auto slow_onset = first_time(rec, [&](const RecordedFrame& f) {
    auto a = at(f, kSlowLane1);
    bool lane1 = a && a->y < synthetic::line_y(1) && a->y > synthetic::line_y(2);
    return lane1 && a->vx * 3.6 < 110.0;  // lane 1 of three: 110 km/h minimum
  });
  auto follow_onset = first_time(rec, [&](const RecordedFrame& f) {
    auto a = at(f, kCloseFollower), b = at(f, kLeader);
    if (!a || !b) return false;
    double gap = (b->x - b->length / 2) - (a->x + a->length / 2);
    double need = a->vx * 3.6 > 100.0 ? 100.0 : 50.0;
    return gap > 0 && gap <= need;
  });
  auto change_onset = first_time(rec, [&](const RecordedFrame& f) {
    auto e = at(f, kLaneChanger), s = at(f, kRearLeft);
    if (!e || !s) return false;
    // Highest box corner against line 3, the left line of lane 3.
    double reach = e->y + e->length / 2 * std::abs(std::sin(e->heading)) + e->width / 2 * std::cos(e->heading);
    bool on_left_line = reach >= synthetic::line_y(3);
    bool moving_left = e->vy > 0.25;
    bool rear_left = s->y > synthetic::line_y(3) && s->y < synthetic::line_y(2) && s->x < e->x;
    double gap = (e->x - e->length / 2) - (s->x + s->length / 2);
    double closing = s->vx - e->vx;
    bool unsafe = gap <= 14.0 || (closing > 0 && gap / closing <= 2.3);
    return on_left_line && moving_left && rear_left && unsafe;
  });
  r.require(slow_onset && follow_onset && change_onset, "oracle found no onset");

  struct Subject {
    ActorId id;
    std::string rule;
    std::optional<double> onset;
  };
  for (const Subject& s : {Subject{kSlowLane1, "78/SpeedViolation", slow_onset},
                           Subject{kCloseFollower, "80/FollowingViolation", follow_onset},
                           Subject{kLaneChanger, "44/RearLeftViolation", change_onset}}) {
    auto ev = events_of(log.events, s.id);
    std::string who = "ego " + std::to_string(s.id);
    r.require(ev.size() == 1 && articles_of(ev, s.id) == std::set<std::string>{s.rule}, who + " events != {" + s.rule + "}");
    if (!ev.empty() && s.onset) {
      double off = std::abs(ev.front().start - *s.onset);
      r.require(off <= kFig9OnsetSamples * dt + 1e-9, who + " onset off by " + format_double(off) + " s");
      r.detail << " " << s.rule << "@" << format_double(ev.front().start) << "(oracle " << format_double(*s.onset)
               << ")";
    }
  }
  for (ActorId c : kControls) {
    r.require(events_of(log.events, c).empty(), "control " + std::to_string(c) + " has events");
  }
  r.require(elapsed < kFixtureBudgetS, "runtime " + format_double(elapsed) + " s");
  r.detail << " runtime=" << format_double(std::round(elapsed * 1e4) / 1e4) << "s";
  return r;
}

// ---------------------------------------------------------------------------
// 2. Illegal intersection examples

Result criterion2() {
  Result r;
  const auto map = synthetic::symmetric_junction();
  const ThresholdConfig cfg;
  auto scenarios = synthetic::fig10_scenarios(map);
  auto t0 = Clock::now();
  for (const auto& sc : scenarios) {
    auto log = monitor_intersection(sc.rec, map, cfg, {1});
    std::vector<std::string> got;
    for (const auto& e : log.events) got.push_back(e.article + "/" + e.sub_rule);
    std::string list;
    for (const auto& g : got) list += (list.empty() ? "" : ",") + g;
    r.require(got == sc.expected, sc.name + " gave {" + list + "}");
    r.require(log.diagnostics.empty() || std::none_of(log.diagnostics.begin(), log.diagnostics.end(),
                                                      [](const Diagnostic& d) { return d.code == "monitor_error"; }),
              sc.name + " monitor error");
    r.detail << " " << sc.name << "=" << (list.empty() ? "none" : list);
  }
  double elapsed = seconds_since(t0);
  r.require(elapsed < kFixtureBudgetS, "runtime " + format_double(elapsed) + " s");
  r.detail << " runtime=" << format_double(std::round(elapsed * 1e4) / 1e4) << "s";
  return r;
}

// ---------------------------------------------------------------------------
// 3. Online against offline MTL

Result criterion3() {
  Result r;
  const mtl::AtomRegistry atoms{"a", "b", "c"};
  std::mt19937_64 rng(20260101);
  lawmon::testing::RandomFormulaGen gen({"a", "b", "c"}, 10, 1.0);
  std::size_t discrepancies = 0, decided = 0;
  for (int i = 0; i < 1000; ++i) {
    mtl::Formula f = gen(rng, 4);
    auto trace = lawmon::testing::random_trace(rng, atoms, 1 + rng() % 200, 1.0, 0.5);
    mtl::OnlineEvaluator ev(f, atoms, 1.0);
    std::vector<mtl::Verdict3> online;
    for (const auto& s : trace) {
      online.push_back(ev.step(s).value);
      for (const auto& res : ev.take_resolved()) online[res.index] = res.verdict.value;
    }
    auto offline = mtl::evaluate_offline(f, trace, atoms, 1.0);
    for (std::size_t k = 0; k < trace.size(); ++k) {
      if (offline[k].value == mtl::Verdict3::Pending) continue;
      ++decided;
      discrepancies += online[k] != offline[k].value;
    }
  }
  r.require(discrepancies == 0, std::to_string(discrepancies) + " discrepancies");
  r.detail << " formulas=1000 decided_indices=" << decided << " discrepancies=" << discrepancies;
  return r;
}

// ---------------------------------------------------------------------------
// 4. Threshold boundaries

Result criterion4() {
  Result r;
  using lawmon::testing::make_frame;
  using lawmon::testing::vehicle;
  const lawmon::testing::StraightRoad road;
  const ThresholdConfig cfg;
  const double y2 = road.lane_center(2);

  // 100 km/h is in the lower branch: 60 m complies, 50 m does not.
  auto f100 = make_frame(road, vehicle(1, 0, y2, 100, 0, 4.0), {vehicle(2, 64, y2, 100, 0, 4.0)}, 0);
  auto c100 = check_following_compliance(f100, cfg);
  r.require(c100.ok && c100.evidence.at("required_gap_m") == 50.0, "100 km/h not on the 50 m branch");
  auto f100b = make_frame(road, vehicle(1, 0, y2, 100, 0, 4.0), {vehicle(2, 54, y2, 100, 0, 4.0)}, 0);
  r.require(!check_following_compliance(f100b, cfg).ok, "50 m at 100 km/h complies");

  // 100.0 m at 110 km/h violates.
  auto f110 = make_frame(road, vehicle(1, 0, y2, 110, 0, 4.0), {vehicle(2, 104, y2, 110, 0, 4.0)}, 0);
  r.require(distance_longitudinal(f110.ego, f110.targets[0]) == 100.0, "gap fixture is not exactly 100 m");
  r.require(!check_following_compliance(f110, cfg).ok, "100.0 m at 110 km/h complies");

  // TTCX of exactly 2.3 s flags FrontViolation.
  auto ego = vehicle(1, 0, -7.5 - 0.6, 0, 0.5, 4.0);
  ego.vx = 30;
  auto lead = vehicle(2, 27, -7.5 - 0.6, 0, 0, 4.0);
  lead.vx = 20;
  auto fttc = make_frame(road, ego, {lead}, 0, DecisionKind::ChangeLeftlane);
  r.require(ttcx(fttc.ego, fttc.targets[0]) == cfg.ttcx_min_s, "TTCX fixture is not exactly 2.3 s");
  HighwayMonitor m(1, cfg);
  auto opened = m.step(fttc);
  bool front = std::any_of(opened.begin(), opened.end(), [](const ViolationEvent& e) {
    return e.article == "44" && e.sub_rule == "FrontViolation";
  });
  r.require(front, "TTCX = 2.3 s not flagged");

  // 6.0 s on a line does not flag; one more sample does.
  const double dt = 0.04;
  HighwayMonitor on(1, cfg);
  std::vector<bool> flag;
  for (int k = 0; k <= 151; ++k) {
    auto e = vehicle(1, k * dt * kmh_to_mps(95), -7.5 + 0.5, 95);
    on.step(make_frame(road, e, {}, k * dt));
    flag.push_back(on.engine().verdict("art82_3_LngTmOnLine"));
  }
  r.require(std::none_of(flag.begin(), flag.begin() + 151, [](bool b) { return b; }), "flagged at or before 6.0 s");
  r.require(flag[151], "not flagged at 6.0 s + one sample");
  r.detail << " branch100=50m gap100@110=violation ttcx2.3=flagged online6.0=quiet online6.04=flagged";
  return r;
}

// ---------------------------------------------------------------------------
// 5. Calibration recovery

Result criterion5() {
  Result r;
  auto t0 = Clock::now();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double lo = 0.8, hi = 8.8, p = 0.9992;
  std::vector<double> x(10000);
  for (auto& v : x) v = lo + (hi - lo) * boost::math::ibeta_inv(2.0, 5.0, u01(rng));
  auto fit = calibrate_on_line_time(x, p, std::make_pair(lo, hi));
  double truth = lo + (hi - lo) * boost::math::ibeta_inv(2.0, 5.0, p);
  double rel = std::abs(fit.t_max_cl_s - truth) / truth;
  r.require(rel <= kQuantileRelTol, "quantile off by " + format_double(rel * 100) + " %");

  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 60; ++i) {
    double t = 0.5 + 0.15 * i;
    pts.emplace_back(t, 2.3 / t);
  }
  auto ttc = calibrate_ttcx(pts);
  r.require(std::abs(ttc.ttcx_s - 2.3) <= kTtcxTolS, "TTCx " + format_double(ttc.ttcx_s));
  double elapsed = seconds_since(t0);
  r.require(elapsed < kCalibrationBudgetS, "runtime " + format_double(elapsed) + " s");
  r.detail << " quantile=" << format_double(std::round(fit.t_max_cl_s * 1e4) / 1e4)
           << "s analytic=" << format_double(std::round(truth * 1e4) / 1e4) << "s rel_err="
           << format_double(std::round(rel * 1e6) / 1e6) << " alpha=" << format_double(std::round(fit.fit.alpha * 1e3) / 1e3)
           << " beta=" << format_double(std::round(fit.fit.beta * 1e3) / 1e3)
           << " ttcx=" << format_double(std::round(ttc.ttcx_s * 1e6) / 1e6) << "s runtime="
           << format_double(std::round(elapsed * 1e4) / 1e4) << "s";
  return r;
}

// ---------------------------------------------------------------------------
// 6. Decision inference

Result criterion6() {
  Result r;
  // Movement from the geometry: entry heading against exit heading.
  const auto map = synthetic::symmetric_junction();
  int pairs = 0;
  for (int i = 1; i <= 4; ++i) {
    for (int o = 1; o <= 4; ++o) {
      if (i == o) continue;
      auto in = map.entry_lane(i, 1).centerline();
      auto out = map.exit_lane(o, 1).centerline();
      Vec2 a = in.back() - in[in.size() - 2], b = out[1] - out.front();
      double turn = std::atan2(cross(a, b), dot(a, b));
      DecisionKind want = std::abs(turn) < kPi / 4 ? DecisionKind::GoStraight
                          : turn > 0               ? DecisionKind::TurnLeft
                                                   : DecisionKind::TurnRight;
      DecisionKind got = infer_intersection_decision(i, o);
      r.require(got == want, std::to_string(i) + "->" + std::to_string(o) + " gave " + to_string(got));
      ++pairs;
    }
  }

  using lawmon::testing::make_frame;
  using lawmon::testing::vehicle;
  const lawmon::testing::StraightRoad road;
  const ThresholdConfig cfg;
  const double y = road.lane_center(2);
  auto lateral = [&](double vy) {
    auto e = vehicle(1, 0, y, 100, vy);
    return raw_highway_decision(make_frame(road, e, {}, 0), cfg);
  };
  r.require(lateral(0.25) == DecisionKind::KeepLane, "vy = 0.25 m/s is a lane change");
  r.require(lateral(0.2501) == DecisionKind::ChangeLeftlane, "vy = 0.2501 m/s is not ChangeLeftlane");
  r.require(lateral(-0.25) == DecisionKind::KeepLane, "vy = -0.25 m/s is a lane change");
  r.require(lateral(-0.2501) == DecisionKind::ChangeRightlane, "vy = -0.2501 m/s is not ChangeRightlane");

  // Front target 5 m/s slower: 100 m bumper gap is TTCX 20 s exactly.
  auto overtake = [&](double gap) {
    auto e = vehicle(1, 0, y, 0, 0.3, 4.0);
    e.vx = 25;
    auto f = vehicle(2, 4.0 + gap, y, 0, 0, 4.0);
    f.vx = 20;
    auto fr = make_frame(road, e, {f}, 0);
    return std::make_pair(ttcx(fr.ego, fr.targets[0]), raw_highway_decision(fr, cfg));
  };
  auto [t20, d20] = overtake(100.0);
  auto [t19, d19] = overtake(99.9);
  r.require(t20 == 20.0, "TTCX fixture is not exactly 20 s");
  r.require(d20 == DecisionKind::ChangeLeftlane, "TTCX = 20 s is an overtake");
  r.require(d19 == DecisionKind::Overtake, "TTCX = " + format_double(t19) + " s is not an overtake");
  r.detail << " pairs=" << pairs << " vy_boundary=0.25 ttc_boundary=20";
  return r;
}

// ---------------------------------------------------------------------------
// 7. Layering

Result criterion7() {
  Result r;
  HighwayMonitor m(1, ThresholdConfig{});
  auto frames = lawmon::testing::OvertakeScript{}.frames();
  for (const auto& f : frames) m.step(f);
  const auto& c = m.counters();
  std::size_t n = frames.size();
  r.require(c.frames == n, "frame count");
  r.require(c.on_line_evals == n, "on-line timer evaluated " + std::to_string(c.on_line_evals) + " times");
  r.require(c.lane_change_left_evals == n && c.lane_change_right_evals == n, "lane-change checks not once per frame");
  r.require(c.consumed_by_82_3 > 0, "82.3 never consumed the timer");
  r.require(c.consumed_by_44 > 0, "44 never consumed the checks");
  r.require(c.consumed_by_47 > 0, "47 never consumed the checks");
  r.detail << " frames=" << n << " on_line_evals=" << c.on_line_evals << " lane_change_evals=" << c.lane_change_left_evals
           << "+" << c.lane_change_right_evals << " consumers(82.3,44,47)=" << c.consumed_by_82_3 << ","
           << c.consumed_by_44 << "," << c.consumed_by_47;
  return r;
}

// ---------------------------------------------------------------------------
// 8. Determinism and throughput

Result criterion8() {
  Result r;
  const auto dense = synthetic::dense_recording(5000, 50);
  const std::string csv = to_csv(dense);
  const auto map = synthetic::straight_highway(3, 7000);
  const ThresholdConfig cfg;
  const double recorded_s = 5000 / dense.rate_hz;
  auto pipeline = [&] {
    auto rec = parse_trajectories(csv, canonical_schema(), "dense.csv");
    auto log = monitor_highway(rec, map, cfg, select_egos(rec, "all"));
    return to_json(log).dump(2);
  };
  auto t0 = Clock::now();
  std::string a = pipeline();
  double first = seconds_since(t0);
  t0 = Clock::now();
  std::string b = pipeline();
  double second = seconds_since(t0);
  double worst = std::max(first, second);
  r.require(a == b, "outputs differ");
  r.require(worst <= recorded_s / kRealTimeFactor, "slowest run " + format_double(worst) + " s");
  r.detail << " frames=5000 actors=50 bytes=" << a.size() << " identical=" << (a == b ? "yes" : "no")
           << " slowest_run=" << format_double(std::round(worst * 1e3) / 1e3) << "s realtime_factor="
           << format_double(std::round(recorded_s / worst * 10) / 10);
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Result (*)()>> criteria{
      {"illegal highway examples", criterion1},  {"illegal intersection examples", criterion2},
      {"online/offline MTL equivalence", criterion3}, {"threshold boundaries", criterion4},
      {"calibration recovery", criterion5},      {"decision inference", criterion6},
      {"layered evaluation", criterion7},        {"determinism and throughput", criterion8}};
  std::optional<std::size_t> only;
  if (argc > 1) {
    only = std::strtoul(argv[1], nullptr, 10);
    if (*only < 1 || *only > criteria.size()) {
      std::fprintf(stderr, "usage: %s [1-%zu]\n", argv[0], criteria.size());
      return 2;
    }
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && *only != i + 1) continue;
    Result res;
    try {
      res = criteria[i].second();
    } catch (const std::exception& e) {
      res.pass = false;
      res.detail << " [exception: " << e.what() << "]";
    }
    failed += !res.pass;
    std::printf("criterion %zu %s: %s%s\n", i + 1, res.pass ? "PASS" : "FAIL", criteria[i].first,
                res.detail.str().c_str());
  }
  return failed ? 1 : 0;
}
