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

#include <boost/math/distributions/beta.hpp>
#include <random>

#include "fixtures/scenarios.hpp"
#include "lawmon/calibration.hpp"

namespace lawmon {
namespace {

using testing::StraightRoad;

HighwayMap straight_map(double length = 3000) {
  StraightRoad road;
  Json lines = Json::array();
  for (std::size_t i = 0; i < road.line_y.size(); ++i) {
    lines.push_back({{"id", i + 1}, {"points", {{-100, road.line_y[i]}, {length, road.line_y[i]}}}});
  }
  return std::get<HighwayMap>(parse_map(Json{{"type", "highway"}, {"lane_lines", lines}}.dump()));
}

struct Track {
  ActorId id;
  std::function<void(double t, ActorSample&)> at;  // fills x, y, vx, vy, ax
};

Recording record(const std::vector<Track>& tracks, double seconds, double hz = 25) {
  Recording rec;
  rec.rate_hz = hz;
  for (int k = 0; k < seconds * hz; ++k) {
    RecordedFrame f;
    f.frame = k;
    f.t = k / hz;
    for (const auto& tr : tracks) {
      ActorSample s;
      s.id = tr.id;
      s.length = 4.8;
      s.width = 1.9;
      tr.at(f.t, s);
      s.heading = std::atan2(s.vy, s.vx);
      f.actors.push_back(s);
    }
    rec.frames.push_back(f);
  }
  return rec;
}

/// Smooth move from y0 to y1 over [t0, t0 + T] at 25 m/s.
Track lane_changer(ActorId id, double y0, double y1, double t0, double T, double x0 = 0) {
  return {id, [=](double t, ActorSample& s) {
            double u = std::clamp((t - t0) / T, 0.0, 1.0);
            s.x = x0 + 25 * t;
            s.vx = 25;
            s.y = y0 + (y1 - y0) * (1 - std::cos(kPi * u)) / 2;
            s.vy = t > t0 && t < t0 + T ? (y1 - y0) * kPi / (2 * T) * std::sin(kPi * u) : 0.0;
          }};
}

Track cruiser(ActorId id, double y, double x0, double v) {
  return {id, [=](double t, ActorSample& s) {
            s.x = x0 + v * t;
            s.y = y;
            s.vx = v;
          }};
}

/// Frames whose box straddles line y = line_y, from the rotated box extent.
int frames_on_line(const Track& tr, double line_y, double seconds, double hz = 25) {
  int n = 0;
  for (int k = 0; k < seconds * hz; ++k) {
    ActorSample s;
    s.length = 4.8;
    s.width = 1.9;
    tr.at(k / hz, s);
    double h = std::atan2(s.vy, s.vx);
    double half = s.length / 2 * std::abs(std::sin(h)) + s.width / 2 * std::cos(h);
    if (std::abs(s.y - line_y) < half) ++n;
  }
  return n;
}

TEST(Extraction, CleanChangeWithRearAndFront) {
  StraightRoad road;
  auto ego = lane_changer(1, road.lane_center(2), road.lane_center(1), 5, 4);
  // Rear car in lane 1 with a 20 m bumper gap; slower car 40 m ahead in lane 2.
  auto rear = cruiser(2, road.lane_center(1), -4.8 - 20, 25);
  auto front = cruiser(3, road.lane_center(2), 4.8 + 40 + 5 * 5, 20);
  auto rec = record({ego, rear, front}, 15);
  ThresholdConfig cfg;
  auto ev = extract_lane_change_events(rec, straight_map(), cfg);
  ASSERT_EQ(ev.size(), 1u);
  const auto& e = ev[0];
  EXPECT_EQ(e.ego_id, 1);
  EXPECT_EQ(e.lane_before, 2);
  EXPECT_EQ(e.lane_after, 1);
  EXPECT_NEAR(e.duration, frames_on_line(ego, road.line_y[1], 15) * 0.04, 1e-9);
  ASSERT_TRUE(e.rear_gap_m);
  EXPECT_NEAR(*e.rear_gap_m, 20.0, 1e-6);
  EXPECT_NEAR(*e.rear_decel_mps2, 0.0, 1e-9);
  EXPECT_EQ(e.rear_id, 2);
  // Front gap at onset: 40 + 5 (closing 5 m/s) * (5 - onset).
  ASSERT_TRUE(e.front_ttc_s);
  double gap = 40 + 5 * (5 - e.start);
  EXPECT_NEAR(*e.front_ttc_s, gap / 5, 1e-6);
  EXPECT_NEAR(*e.ratio, e.duration / *e.front_ttc_s, 1e-12);
}

TEST(Extraction, RearOutsideSearchRangeIsIgnored) {
  StraightRoad road;
  auto ego = lane_changer(1, road.lane_center(2), road.lane_center(1), 5, 4);
  auto rear = cruiser(2, road.lane_center(1), -4.8 - 35, 25);
  auto ev = extract_lane_change_events(record({ego, rear}, 15), straight_map(), ThresholdConfig{});
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_FALSE(ev[0].rear_gap_m.has_value());
  EXPECT_FALSE(ev[0].front_ttc_s.has_value());
}

TEST(Extraction, AbandonedChangeIsNotAnEvent) {
  StraightRoad road;
  // Out to the line and back.
  Track t{1, [&](double t, ActorSample& s) {
            s.x = 25 * t;
            s.vx = 25;
            double u = std::clamp((t - 2) / 6, 0.0, 1.0);
            s.y = road.lane_center(2) + 1.5 * std::sin(kPi * u);
            s.vy = t > 2 && t < 8 ? 1.5 * kPi / 6 * std::cos(kPi * u) : 0.0;
          }};
  ASSERT_GT(frames_on_line(t, road.line_y[1], 10), 0);
  EXPECT_TRUE(extract_lane_change_events(record({t}, 10), straight_map(), ThresholdConfig{}).empty());
}

TEST(Extraction, CountsScriptedChanges) {
  StraightRoad road;
  double c1 = road.lane_center(1), c2 = road.lane_center(2), c3 = road.lane_center(3);
  // 2 -> 1 -> 2 -> 3 for id 1, 3 -> 2 for id 5, none for id 9.
  Track a{1, [=](double t, ActorSample& s) {
            auto one = lane_changer(1, c2, c1, 2, 4);
            auto two = lane_changer(1, c1, c2, 10, 4);
            auto three = lane_changer(1, c2, c3, 18, 4);
            (t < 8 ? one : t < 16 ? two : three).at(t, s);
          }};
  auto b = lane_changer(5, c3, c2, 6, 3, 300);
  auto c = cruiser(9, c1, 600, 30);
  auto rec = record({a, b, c}, 26);
  auto ev = extract_lane_change_events(rec, straight_map(), ThresholdConfig{});
  ASSERT_EQ(ev.size(), 4u);
  EXPECT_EQ(ev[0].ego_id, 1);
  EXPECT_EQ(ev[0].lane_after, 1);
  EXPECT_EQ(ev[1].lane_after, 2);
  EXPECT_EQ(ev[2].lane_after, 3);
  EXPECT_EQ(ev[3].ego_id, 5);
}

TEST(Extraction, EgoOrderDoesNotMatter) {
  StraightRoad road;
  std::vector<Track> tracks;
  for (int i = 0; i < 6; ++i) {
    bool up = i % 2 == 0;
    tracks.push_back(lane_changer(10 + i, road.lane_center(up ? 2 : 1), road.lane_center(up ? 1 : 2), 1 + i, 3,
                                  60.0 * i));
  }
  auto rec = record(tracks, 12);
  auto map = straight_map();
  ThresholdConfig cfg;
  auto all = extract_lane_change_events(rec, map, cfg);
  auto ids = rec.vehicle_ids();
  std::mt19937 rng(8);
  for (int rep = 0; rep < 3; ++rep) {
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<LaneChangeEvent> merged;
    for (auto id : ids) {
      auto ev = detail::lane_changes_of(rec, id, map, cfg);
      merged.insert(merged.end(), ev.begin(), ev.end());
    }
    EXPECT_TRUE(std::is_permutation(merged.begin(), merged.end(), all.begin(), all.end()));
  }
}

LaneChangeEvent cut_in(double gap, double decel) {
  LaneChangeEvent e;
  e.duration = 3;
  e.rear_gap_m = gap;
  e.rear_decel_mps2 = decel;
  return e;
}

/// Five events per 1 m bin from 2 to 29 m: three hard and two mild below
/// 14 m, four mild and one hard from 14 m.
std::vector<LaneChangeEvent> crossover_population() {
  std::vector<LaneChangeEvent> ev;
  for (int k = 2; k < 30; ++k) {
    int mild = k < 14 ? 2 : 4;
    for (int i = 0; i < 5; ++i) ev.push_back(cut_in(k + 0.1 + 0.15 * i, i < mild ? 0.1 + 0.02 * i : 0.6 + 0.1 * i));
  }
  return ev;
}

TEST(CutIn, CrossoverPopulation) {
  auto r = calibrate_cut_in_distance(crossover_population(), 0.35);
  EXPECT_EQ(r.d_clmin_m, 14.0);
  ASSERT_EQ(r.histogram.size(), 28u);
  EXPECT_EQ(r.histogram[0].lo, 2.0);
  EXPECT_EQ(r.histogram[0].hard, 3u);
  EXPECT_EQ(r.histogram[12].mild, 4u);
}

TEST(CutIn, DegenerateAndInsufficientPopulations) {
  std::vector<LaneChangeEvent> mild, hard;
  for (int i = 0; i < 40; ++i) {
    mild.push_back(cut_in(7.5 + i * 0.5, 0.1));
    hard.push_back(cut_in(7.5 + i * 0.5, 0.9));
  }
  EXPECT_EQ(calibrate_cut_in_distance(mild, 0.35).d_clmin_m, 7.0);
  EXPECT_THROW(calibrate_cut_in_distance(hard, 0.35), InputError);
  mild.resize(29);
  EXPECT_THROW(calibrate_cut_in_distance(mild, 0.35), InputError);
  // Events without rear data do not count toward the minimum.
  mild.push_back(LaneChangeEvent{});
  EXPECT_THROW(calibrate_cut_in_distance(mild, 0.35), InputError);
}

TEST(CutIn, RaisingTheDividingLineNeverRaisesTheDistance) {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> gap(1, 30), noise(-0.3, 0.3);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<LaneChangeEvent> ev;
    for (int i = 0; i < 200; ++i) {
      double g = gap(rng);
      ev.push_back(cut_in(g, std::max(0.0, 1.2 - g / 20 + noise(rng))));
    }
    std::optional<double> prev;
    for (double d = 0.2; d <= 1.6; d += 0.05) {
      std::optional<double> cur;
      try {
        cur = calibrate_cut_in_distance(ev, d).d_clmin_m;
      } catch (const InputError&) {
      }
      if (prev) {
        ASSERT_TRUE(cur.has_value()) << d;
        ASSERT_LE(*cur, *prev) << d;
      }
      if (cur) prev = cur;
    }
  }
}

std::vector<double> beta_sample(double a, double b, double lo, double hi, std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) {
    double x = ga(rng), y = gb(rng);
    v = lo + (hi - lo) * x / (x + y);
  }
  return out;
}

TEST(OnLineTime, BetaFitRecoversKnownParameters) {
  auto x = beta_sample(2, 5, 0.8, 8.8, 10000, 1);
  auto r = calibrate_on_line_time(x, 0.9992, std::make_pair(0.8, 8.8));
  EXPECT_NEAR(r.fit.alpha, 2.0, 0.05 * 2.0);
  EXPECT_NEAR(r.fit.beta, 5.0, 0.05 * 5.0);
  double want = 0.8 + 8.0 * boost::math::quantile(boost::math::beta_distribution<>(2, 5), 0.9992);
  EXPECT_NEAR(r.t_max_cl_s, want, 0.02 * want);
}

TEST(OnLineTime, FitIsAStationaryPointOfTheLikelihood) {
  auto x = beta_sample(3.5, 1.7, 1, 4, 3000, 4);
  auto f = fit_beta(x, 1, 4);
  double n = static_cast<double>(x.size()), s1 = 0, s2 = 0;
  for (double v : x) {
    double u = std::clamp((v - 1) / 3, 1e-6, 1 - 1e-6);
    s1 += std::log(u);
    s2 += std::log1p(-u);
  }
  using boost::math::digamma;
  EXPECT_NEAR(n * (digamma(f.alpha + f.beta) - digamma(f.alpha)) + s1, 0.0, 1e-6);
  EXPECT_NEAR(n * (digamma(f.alpha + f.beta) - digamma(f.beta)) + s2, 0.0, 1e-6);
}

TEST(OnLineTime, EdgeCases) {
  auto x = beta_sample(2, 5, 0.8, 8.8, 500, 2);
  EXPECT_EQ(calibrate_on_line_time(x, 1.0).t_max_cl_s, *std::max_element(x.begin(), x.end()));
  EXPECT_THROW(calibrate_on_line_time(std::vector<double>(40, 3.0), 0.99), InputError);
  EXPECT_THROW(calibrate_on_line_time(std::vector<double>(10, 3.0), 0.99), InputError);
  EXPECT_THROW(calibrate_on_line_time(x, 0.0), InputError);
}

std::vector<std::pair<double, double>> inverse_law(double c, double scale = 1.0) {
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 60; ++i) {
    double ttc = 0.5 + 0.15 * i;
    pts.emplace_back(scale * ttc, c / ttc);
  }
  return pts;
}

TEST(Ttcx, InverseLawFixture) {
  auto r = calibrate_ttcx(inverse_law(2.3));
  EXPECT_NEAR(r.ttcx_s, 2.3, 1e-12);
  EXPECT_NEAR(calibrate_ttcx(inverse_law(2.3), RatioModel::Power).ttcx_s, 2.3, 1e-9);
  EXPECT_THROW(calibrate_ttcx(inverse_law(0.3)), InputError);
  auto few = inverse_law(2.3);
  few.resize(20);
  EXPECT_THROW(calibrate_ttcx(few), InputError);
}

TEST(Ttcx, CrossingScalesWithTheTimeUnit) {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> ttc(0.5, 9), noise(0.8, 1.2);
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 100; ++i) {
    double t = ttc(rng);
    pts.emplace_back(t, 2.0 / t * noise(rng));
  }
  for (auto model : {RatioModel::Inverse, RatioModel::Power}) {
    double base = calibrate_ttcx(pts, model).ttcx_s;
    for (double k : {1000.0, 1 / 60.0}) {
      auto scaled = pts;
      for (auto& p : scaled) p.first *= k;  // ratio is unitless
      EXPECT_NEAR(calibrate_ttcx(scaled, model).ttcx_s, k * base, 1e-9 * k * base);
    }
  }
}

TEST(TwoMeans, SplitsTwoClusters) {
  std::vector<double> v;
  for (int i = 0; i < 50; ++i) v.push_back(0.1 + 0.001 * i);
  for (int i = 0; i < 30; ++i) v.push_back(0.8 + 0.002 * i);
  double m1 = 0.1 + 0.001 * 24.5, m2 = 0.8 + 0.002 * 14.5;
  EXPECT_NEAR(two_means_dividing_line(v), (m1 + m2) / 2, 1e-12);
}

TEST(Calibrate, ReportsStepsThatCannotRun) {
  StraightRoad road;
  auto rec = record({lane_changer(1, road.lane_center(2), road.lane_center(1), 2, 4)}, 8);
  ThresholdConfig cfg;
  auto r = calibrate(rec, straight_map(), cfg);
  EXPECT_EQ(r.events, 1u);
  EXPECT_EQ(r.errors.size(), 3u);
  EXPECT_EQ(r.config.d_clmin_m, cfg.d_clmin_m);
  auto j = to_json(r);
  EXPECT_EQ(j["errors"].size(), 3u);
  EXPECT_EQ(j["thresholds"]["ttcx_min_s"], 2.3);
}

}  // namespace
}  // namespace lawmon
