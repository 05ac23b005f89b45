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

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "lawmon/config.hpp"
#include "lawmon/dataset_io.hpp"
#include "lawmon/world.hpp"

namespace lawmon {

/// One completed lane change: a maximal run of frames on a boundary line of
/// the current lane whose lane index differs before and after.
struct LaneChangeEvent {
  ActorId ego_id = 0;
  double start = 0;
  double end = 0;
  double duration = 0;  // frames on the line times the period
  int lane_before = 0;
  int lane_after = 0;
  std::optional<ActorId> rear_id;
  std::optional<double> rear_gap_m;
  std::optional<double> rear_decel_mps2;  // mean of -a_x over the episode
  std::optional<double> front_ttc_s;
  std::optional<double> ratio;  // duration / front_ttc_s

  friend bool operator==(const LaneChangeEvent&, const LaneChangeEvent&) = default;
};

namespace detail {

/// Lane-change episodes of one vehicle.
inline std::vector<LaneChangeEvent> lane_changes_of(const Recording& rec, ActorId id, const HighwayMap& map,
                                                    const ThresholdConfig& cfg) {
  HighwayReplay replay(rec, id, map, cfg);
  const double period = 1.0 / rec.rate_hz;
  std::vector<SceneFrame> frames;
  std::vector<std::optional<int>> lanes;
  std::vector<bool> on;
  frames.reserve(replay.size());
  for (std::size_t k = 0; k < replay.size(); ++k) {
    frames.push_back(replay.frame(k));
    const auto& f = frames.back();
    auto lane = lane_of(f.ego, f.lanes);
    lanes.push_back(lane);
    bool hit = false;
    if (lane) {
      auto box = f.ego.box();
      for (int line : {*lane, *lane + 1}) {
        const Cubic* c = lane_line(f.lanes, line);
        hit = hit || (c && overlap(box, *c, cfg.curve_step_m));
      }
    }
    on.push_back(hit);
  }

  std::vector<LaneChangeEvent> out;
  std::size_t n = frames.size();
  for (std::size_t k = 0; k < n;) {
    if (!on[k]) {
      ++k;
      continue;
    }
    std::size_t a = k;
    while (k < n && on[k]) ++k;
    std::size_t b = k;  // one past the episode
    // Episodes cut by the recording edges have no before or after lane.
    if (a == 0 || b == n || !lanes[a - 1] || !lanes[b] || *lanes[a - 1] == *lanes[b]) continue;
    LaneChangeEvent e;
    e.ego_id = id;
    e.start = frames[a].timestamp;
    e.end = frames[b - 1].timestamp;
    e.duration = static_cast<double>(b - a) * period;
    e.lane_before = *lanes[a - 1];
    e.lane_after = *lanes[b];

    // Nearest rear vehicle in the target lane at onset, within the search range.
    const SceneFrame& f0 = frames[a];
    double best = kInfinity;
    for (const auto& t : f0.targets) {
      if (lane_of(t, f0.lanes) != e.lane_after || t.x >= f0.ego.x) continue;
      double gap = distance_longitudinal(t, f0.ego);
      if (gap <= cfg.rear_search_m && gap < best) {
        best = gap;
        e.rear_id = t.id;
      }
    }
    if (e.rear_id) {
      e.rear_gap_m = best;
      double sum = 0;
      int count = 0;
      for (std::size_t i = a; i < b; ++i) {
        for (const auto& t : frames[i].targets) {
          if (t.id == *e.rear_id) {
            sum += -t.ax;
            ++count;
          }
        }
      }
      e.rear_decel_mps2 = sum / count;
    }
    // Front vehicle in the original lane at onset.
    double front_gap = kInfinity;
    const VehicleState* front = nullptr;
    for (const auto& t : f0.targets) {
      if (lane_of(t, f0.lanes) != e.lane_before || t.x < f0.ego.x) continue;
      double gap = distance_longitudinal(f0.ego, t);
      if (gap < front_gap) {
        front_gap = gap;
        front = &t;
      }
    }
    if (front) {
      double ttc = ttcx(f0.ego, *front);
      if (std::isfinite(ttc) && ttc > 0) {
        e.front_ttc_s = ttc;
        e.ratio = e.duration / ttc;
      }
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace detail

/// Lane changes of every vehicle, sorted by (ego id, start).
inline std::vector<LaneChangeEvent> extract_lane_change_events(const Recording& rec, const HighwayMap& map,
                                                               const ThresholdConfig& cfg) {
  std::vector<LaneChangeEvent> out;
  for (ActorId id : rec.vehicle_ids()) {
    auto ev = detail::lane_changes_of(rec, id, map, cfg);
    out.insert(out.end(), ev.begin(), ev.end());
  }
  std::sort(out.begin(), out.end(), [](const LaneChangeEvent& a, const LaneChangeEvent& b) {
    return a.ego_id != b.ego_id ? a.ego_id < b.ego_id : a.start < b.start;
  });
  return out;
}

inline constexpr std::size_t kMinCalibrationEvents = 30;

struct GapBin {
  double lo = 0;  // [lo, lo + 1) metres
  std::size_t mild = 0;
  std::size_t hard = 0;
  friend bool operator==(const GapBin&, const GapBin&) = default;
};

struct CutInResult {
  double d_clmin_m = 0;
  std::vector<GapBin> histogram;
};

/// Smallest 1 m gap bin such that in it and in every non-empty bin above it,
/// rear vehicles decelerating below `dividing` outnumber the others.
inline CutInResult calibrate_cut_in_distance(const std::vector<LaneChangeEvent>& events, double dividing) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& e : events) {
    if (e.rear_gap_m && e.rear_decel_mps2) pts.emplace_back(*e.rear_gap_m, *e.rear_decel_mps2);
  }
  if (pts.size() < kMinCalibrationEvents) {
    throw InputError("cut-in calibration needs at least 30 events with a rear vehicle, got " +
                     std::to_string(pts.size()));
  }
  std::map<long, GapBin> bins;
  for (auto [gap, decel] : pts) {
    long k = static_cast<long>(std::floor(gap));
    auto& b = bins[k];
    b.lo = static_cast<double>(k);
    (decel < dividing ? b.mild : b.hard) += 1;
  }
  CutInResult r;
  for (const auto& [k, b] : bins) r.histogram.push_back(b);
  std::optional<double> answer;
  for (auto it = r.histogram.rbegin(); it != r.histogram.rend(); ++it) {
    if (it->mild <= it->hard) break;
    answer = it->lo;
  }
  if (!answer) throw InputError("no gap above which mild decelerations dominate");
  r.d_clmin_m = *answer;
  return r;
}

struct BetaFit {
  double alpha = 0, beta = 0;
  double lo = 0, hi = 0;  // support in seconds
  int iterations = 0;

  double quantile(double p) const { return lo + (hi - lo) * boost::math::ibeta_inv(alpha, beta, p); }
};

/// Maximum-likelihood Beta fit of samples mapped affinely from [lo, hi] to the
/// unit interval and clamped to [eps, 1 - eps]. Newton iterations from the
/// method-of-moments estimate, step-halved to stay positive.
inline BetaFit fit_beta(const std::vector<double>& x, double lo, double hi, double eps = 1e-6) {
  if (!(hi > lo)) throw InputError("Beta fit needs a sample with positive spread");
  const double n = static_cast<double>(x.size());
  double s1 = 0, s2 = 0, mean = 0, var = 0;
  std::vector<double> u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    u[i] = std::clamp((x[i] - lo) / (hi - lo), eps, 1 - eps);
    s1 += std::log(u[i]);
    s2 += std::log1p(-u[i]);
    mean += u[i];
  }
  mean /= n;
  for (double v : u) var += (v - mean) * (v - mean);
  var /= n;
  if (!(var > 0)) throw InputError("Beta fit on a zero-variance sample");
  double common = std::max(mean * (1 - mean) / var - 1, 1e-3);
  double a = mean * common, b = (1 - mean) * common;
  BetaFit fit{a, b, lo, hi, 0};
  using boost::math::digamma;
  using boost::math::trigamma;
  for (int it = 0; it < 200; ++it) {
    double dab = digamma(a + b), tab = trigamma(a + b);
    double g1 = n * (dab - digamma(a)) + s1;
    double g2 = n * (dab - digamma(b)) + s2;
    double h11 = n * (tab - trigamma(a)), h22 = n * (tab - trigamma(b)), h12 = n * tab;
    double det = h11 * h22 - h12 * h12;
    double da = -(h22 * g1 - h12 * g2) / det;
    double db = -(h11 * g2 - h12 * g1) / det;
    double step = 1;
    while (a + step * da <= 0 || b + step * db <= 0) step /= 2;
    a += step * da;
    b += step * db;
    fit.iterations = it + 1;
    if (std::abs(step * da) < 1e-10 * a && std::abs(step * db) < 1e-10 * b) break;
  }
  fit.alpha = a;
  fit.beta = b;
  return fit;
}

struct OnLineTimeResult {
  double t_max_cl_s = 0;
  BetaFit fit;
};

/// Coverage quantile of the fitted on-line time distribution. The support is
/// the sample range unless given.
inline OnLineTimeResult calibrate_on_line_time(const std::vector<double>& durations, double coverage,
                                               std::optional<std::pair<double, double>> support = std::nullopt) {
  if (durations.size() < kMinCalibrationEvents) {
    throw InputError("on-line time calibration needs at least 30 durations, got " + std::to_string(durations.size()));
  }
  if (!(coverage > 0 && coverage <= 1)) throw InputError("coverage must lie in (0, 1]");
  auto [mn, mx] = std::minmax_element(durations.begin(), durations.end());
  double lo = support ? support->first : *mn, hi = support ? support->second : *mx;
  OnLineTimeResult r;
  r.fit = fit_beta(durations, lo, hi);
  r.t_max_cl_s = coverage == 1.0 ? *mx : r.fit.quantile(coverage);
  return r;
}

inline OnLineTimeResult calibrate_on_line_time(const std::vector<LaneChangeEvent>& events, double coverage) {
  std::vector<double> d;
  for (const auto& e : events) d.push_back(e.duration);
  return calibrate_on_line_time(d, coverage);
}

enum class RatioModel { Inverse, Power };

struct TtcxResult {
  double ttcx_s = 0;
  RatioModel model = RatioModel::Inverse;
  double c = 0;  // ratio = c / ttc^p
  double p = 1;
  double ttc_min = 0, ttc_max = 0;
};

/// Fits ratio = c / TTC (or c / TTC^p) to (initial front TTC, on-line time /
/// TTC) pairs and returns the TTC where the curve crosses 1.
inline TtcxResult calibrate_ttcx(const std::vector<std::pair<double, double>>& ttc_ratio,
                                 RatioModel model = RatioModel::Inverse) {
  if (ttc_ratio.size() < kMinCalibrationEvents) {
    throw InputError("TTCx calibration needs at least 30 events with a front vehicle, got " +
                     std::to_string(ttc_ratio.size()));
  }
  TtcxResult r;
  r.model = model;
  r.ttc_min = kInfinity;
  r.ttc_max = 0;
  for (auto [t, q] : ttc_ratio) {
    if (!(t > 0) || !(q > 0)) throw InputError("TTC and ratio must be positive");
    r.ttc_min = std::min(r.ttc_min, t);
    r.ttc_max = std::max(r.ttc_max, t);
  }
  if (model == RatioModel::Inverse) {
    double num = 0, den = 0;
    for (auto [t, q] : ttc_ratio) {
      num += q / t;
      den += 1 / (t * t);
    }
    r.c = num / den;
    r.p = 1;
    r.ttcx_s = r.c;
  } else {
    // Least squares in log space: ln q = ln c - p ln t.
    double n = static_cast<double>(ttc_ratio.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [t, q] : ttc_ratio) {
      double lx = std::log(t), ly = std::log(q);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    double d = n * sxx - sx * sx;
    if (!(d > 0)) throw InputError("power-law fit needs distinct TTC values");
    double slope = (n * sxy - sx * sy) / d;
    r.p = -slope;
    r.c = std::exp((sy - slope * sx) / n);
    if (!(r.p > 0)) throw InputError("fitted ratio curve is not decreasing");
    r.ttcx_s = std::pow(r.c, 1 / r.p);
  }
  if (!(r.ttcx_s >= r.ttc_min && r.ttcx_s <= r.ttc_max)) {
    throw InputError("fitted ratio curve does not cross 1 within the observed TTC range");
  }
  return r;
}

inline TtcxResult calibrate_ttcx(const std::vector<LaneChangeEvent>& events, RatioModel model = RatioModel::Inverse) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& e : events) {
    if (e.front_ttc_s && e.ratio) pts.emplace_back(*e.front_ttc_s, *e.ratio);
  }
  return calibrate_ttcx(pts, model);
}

/// Exact 1-D 2-means split of rear decelerations; returns the midpoint
/// between the cluster means. Diagnostic only.
inline double two_means_dividing_line(std::vector<double> v) {
  if (v.size() < 2) throw InputError("2-means needs at least two values");
  std::sort(v.begin(), v.end());
  std::vector<double> pre(v.size() + 1, 0.0), pre2(v.size() + 1, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    pre[i + 1] = pre[i] + v[i];
    pre2[i + 1] = pre2[i] + v[i] * v[i];
  }
  auto sse = [&](std::size_t a, std::size_t b) {
    double s = pre[b] - pre[a], s2 = pre2[b] - pre2[a], m = static_cast<double>(b - a);
    return s2 - s * s / m;
  };
  std::size_t best = 1;
  double best_cost = kInfinity;
  for (std::size_t k = 1; k < v.size(); ++k) {
    double c = sse(0, k) + sse(k, v.size());
    if (c < best_cost) {
      best_cost = c;
      best = k;
    }
  }
  double m1 = pre[best] / static_cast<double>(best);
  double m2 = (pre[v.size()] - pre[best]) / static_cast<double>(v.size() - best);
  return (m1 + m2) / 2;
}

struct CalibrationReport {
  ThresholdConfig config;
  std::size_t events = 0;
  std::optional<CutInResult> cut_in;
  std::optional<OnLineTimeResult> on_line;
  std::optional<TtcxResult> ttcx;
  std::optional<double> two_means;
  std::vector<std::string> errors;  // one per step that could not run
};

/// Runs the three calibrations. Steps that fail keep the input threshold and
/// record why.
inline CalibrationReport calibrate(const Recording& rec, const HighwayMap& map, const ThresholdConfig& cfg,
                                   RatioModel model = RatioModel::Inverse) {
  CalibrationReport r;
  r.config = cfg;
  auto events = extract_lane_change_events(rec, map, cfg);
  r.events = events.size();
  try {
    r.cut_in = calibrate_cut_in_distance(events, cfg.cut_in_decel_mps2);
    r.config.d_clmin_m = r.cut_in->d_clmin_m;
  } catch (const InputError& e) {
    r.errors.push_back(std::string("d_clmin_m: ") + e.what());
  }
  try {
    r.on_line = calibrate_on_line_time(events, cfg.beta_coverage);
    r.config.t_max_cl_s = r.on_line->t_max_cl_s;
  } catch (const InputError& e) {
    r.errors.push_back(std::string("t_max_cl_s: ") + e.what());
  }
  try {
    r.ttcx = calibrate_ttcx(events, model);
    r.config.ttcx_min_s = r.ttcx->ttcx_s;
  } catch (const InputError& e) {
    r.errors.push_back(std::string("ttcx_min_s: ") + e.what());
  }
  std::vector<double> decel;
  for (const auto& e : events) {
    if (e.rear_decel_mps2) decel.push_back(*e.rear_decel_mps2);
  }
  if (decel.size() >= 2) r.two_means = two_means_dividing_line(decel);
  return r;
}

inline Json to_json(const CalibrationReport& r) {
  Json j;
  j["events"] = r.events;
  j["thresholds"] = {{"d_clmin_m", r.config.d_clmin_m},
                     {"t_max_cl_s", r.config.t_max_cl_s},
                     {"ttcx_min_s", r.config.ttcx_min_s}};
  if (r.cut_in) {
    Json h = Json::array();
    for (const auto& b : r.cut_in->histogram) h.push_back({{"gap_lo_m", b.lo}, {"mild", b.mild}, {"hard", b.hard}});
    j["cut_in"] = {{"dividing_decel_mps2", r.config.cut_in_decel_mps2}, {"histogram", h}};
  }
  if (r.on_line) {
    const auto& f = r.on_line->fit;
    j["on_line_time"] = {{"coverage", r.config.beta_coverage},
                         {"alpha", f.alpha},
                         {"beta", f.beta},
                         {"support_s", {f.lo, f.hi}}};
  }
  if (r.ttcx) {
    j["ttcx"] = {{"model", r.ttcx->model == RatioModel::Inverse ? "inverse" : "power"},
                 {"c", r.ttcx->c},
                 {"p", r.ttcx->p},
                 {"ttc_range_s", {r.ttcx->ttc_min, r.ttcx->ttc_max}},
                 {"note", "ratio curve family is a modelling choice"}};
  }
  if (r.two_means) j["two_means_dividing_decel_mps2"] = *r.two_means;
  j["errors"] = r.errors;
  return j;
}

}  // namespace lawmon
