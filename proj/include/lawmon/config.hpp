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

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lawmon/common.hpp"

namespace lawmon {

/// Every tunable threshold. Key names in the config file carry their unit.
struct ThresholdConfig {
  // Lane change and on-line time.
  double d_clmin_m = 14.0;
  double t_max_cl_s = 6.0;
  double ttcx_min_s = 2.3;
  // Overtaking.
  double delta_v_ot_kmh = 15.0;
  double overtake_timeout_s = 30.0;
  // Decision inference.
  double lane_change_vy_mps = 0.25;
  double overtake_ttc_s = 20.0;
  double latch_settle_s = 0.5;
  double latch_timeout_s = 15.0;
  double overtake_latch_timeout_s = 30.0;
  // Speed (km/h).
  double speed_min_kmh = 60.0;
  double speed_max_kmh = 120.0;
  double lane1_min_3plus_kmh = 110.0;
  double middle_min_3plus_kmh = 90.0;
  double lane1_min_2_kmh = 100.0;
  // Following distance.
  double follow_speed_split_kmh = 100.0;
  double follow_gap_fast_m = 100.0;
  double follow_gap_slow_m = 50.0;
  // Geometry.
  double curve_step_m = 0.1;
  // Intersection.
  double angle_gs_min_rad = -kPi / 6;
  double angle_gs_max_rad = kPi / 6;
  double angle_tl_min_rad = kPi / 6;
  double angle_tl_max_rad = kPi / 2;
  double corridor_widening_m = 0.0;
  double check_area_extension_m = 0.0;
  double conflict_overlap_m = 0.5;
  double standstill_mps = 0.0;
  double ped_min_speed_mps = 0.2;
  double ped_horizon_s = 5.0;
  // Calibration.
  double cut_in_decel_mps2 = 0.35;
  double rear_search_m = 30.0;
  double beta_coverage = 0.9992;
  // Events and reports.
  double debounce_s = 0.0;
  double highway_bin_s = 5.0;
  double intersection_bin_s = 20.0;
};

namespace detail {

struct ConfigKey {
  const char* name;
  double ThresholdConfig::*field;
};

inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      {"d_clmin_m", &ThresholdConfig::d_clmin_m},
      {"t_max_cl_s", &ThresholdConfig::t_max_cl_s},
      {"ttcx_min_s", &ThresholdConfig::ttcx_min_s},
      {"delta_v_ot_kmh", &ThresholdConfig::delta_v_ot_kmh},
      {"overtake_timeout_s", &ThresholdConfig::overtake_timeout_s},
      {"lane_change_vy_mps", &ThresholdConfig::lane_change_vy_mps},
      {"overtake_ttc_s", &ThresholdConfig::overtake_ttc_s},
      {"latch_settle_s", &ThresholdConfig::latch_settle_s},
      {"latch_timeout_s", &ThresholdConfig::latch_timeout_s},
      {"overtake_latch_timeout_s", &ThresholdConfig::overtake_latch_timeout_s},
      {"speed_min_kmh", &ThresholdConfig::speed_min_kmh},
      {"speed_max_kmh", &ThresholdConfig::speed_max_kmh},
      {"lane1_min_3plus_kmh", &ThresholdConfig::lane1_min_3plus_kmh},
      {"middle_min_3plus_kmh", &ThresholdConfig::middle_min_3plus_kmh},
      {"lane1_min_2_kmh", &ThresholdConfig::lane1_min_2_kmh},
      {"follow_speed_split_kmh", &ThresholdConfig::follow_speed_split_kmh},
      {"follow_gap_fast_m", &ThresholdConfig::follow_gap_fast_m},
      {"follow_gap_slow_m", &ThresholdConfig::follow_gap_slow_m},
      {"curve_step_m", &ThresholdConfig::curve_step_m},
      {"angle_gs_min_rad", &ThresholdConfig::angle_gs_min_rad},
      {"angle_gs_max_rad", &ThresholdConfig::angle_gs_max_rad},
      {"angle_tl_min_rad", &ThresholdConfig::angle_tl_min_rad},
      {"angle_tl_max_rad", &ThresholdConfig::angle_tl_max_rad},
      {"corridor_widening_m", &ThresholdConfig::corridor_widening_m},
      {"check_area_extension_m", &ThresholdConfig::check_area_extension_m},
      {"conflict_overlap_m", &ThresholdConfig::conflict_overlap_m},
      {"standstill_mps", &ThresholdConfig::standstill_mps},
      {"ped_min_speed_mps", &ThresholdConfig::ped_min_speed_mps},
      {"ped_horizon_s", &ThresholdConfig::ped_horizon_s},
      {"cut_in_decel_mps2", &ThresholdConfig::cut_in_decel_mps2},
      {"rear_search_m", &ThresholdConfig::rear_search_m},
      {"beta_coverage", &ThresholdConfig::beta_coverage},
      {"debounce_s", &ThresholdConfig::debounce_s},
      {"highway_bin_s", &ThresholdConfig::highway_bin_s},
      {"intersection_bin_s", &ThresholdConfig::intersection_bin_s},
  };
  return keys;
}

}  // namespace detail

/// Throws InputError describing the first broken constraint.
inline void validate(const ThresholdConfig& c) {
  for (const auto& k : detail::config_keys()) {
    if (!std::isfinite(c.*k.field)) throw InputError(std::string(k.name) + " must be finite");
  }
  auto positive = [](double v, const char* name) {
    if (!(v > 0)) throw InputError(std::string(name) + " must be positive");
  };
  auto non_negative = [](double v, const char* name) {
    if (v < 0) throw InputError(std::string(name) + " must not be negative");
  };
  positive(c.d_clmin_m, "d_clmin_m");
  positive(c.t_max_cl_s, "t_max_cl_s");
  positive(c.ttcx_min_s, "ttcx_min_s");
  positive(c.delta_v_ot_kmh, "delta_v_ot_kmh");
  positive(c.overtake_timeout_s, "overtake_timeout_s");
  positive(c.lane_change_vy_mps, "lane_change_vy_mps");
  positive(c.overtake_ttc_s, "overtake_ttc_s");
  positive(c.latch_settle_s, "latch_settle_s");
  positive(c.latch_timeout_s, "latch_timeout_s");
  positive(c.overtake_latch_timeout_s, "overtake_latch_timeout_s");
  positive(c.speed_min_kmh, "speed_min_kmh");
  positive(c.speed_max_kmh, "speed_max_kmh");
  positive(c.lane1_min_3plus_kmh, "lane1_min_3plus_kmh");
  positive(c.middle_min_3plus_kmh, "middle_min_3plus_kmh");
  positive(c.lane1_min_2_kmh, "lane1_min_2_kmh");
  positive(c.follow_speed_split_kmh, "follow_speed_split_kmh");
  positive(c.follow_gap_fast_m, "follow_gap_fast_m");
  positive(c.follow_gap_slow_m, "follow_gap_slow_m");
  positive(c.curve_step_m, "curve_step_m");
  positive(c.conflict_overlap_m, "conflict_overlap_m");
  positive(c.ped_min_speed_mps, "ped_min_speed_mps");
  positive(c.ped_horizon_s, "ped_horizon_s");
  positive(c.cut_in_decel_mps2, "cut_in_decel_mps2");
  positive(c.rear_search_m, "rear_search_m");
  positive(c.highway_bin_s, "highway_bin_s");
  positive(c.intersection_bin_s, "intersection_bin_s");
  non_negative(c.corridor_widening_m, "corridor_widening_m");
  non_negative(c.check_area_extension_m, "check_area_extension_m");
  non_negative(c.standstill_mps, "standstill_mps");
  non_negative(c.debounce_s, "debounce_s");
  if (!(c.d_clmin_m < 100)) throw InputError("d_clmin_m must be below 100 m");
  if (!(c.ttcx_min_s < c.overtake_ttc_s)) throw InputError("ttcx_min_s must be below overtake_ttc_s");
  if (c.speed_min_kmh > c.speed_max_kmh) throw InputError("speed_min_kmh exceeds speed_max_kmh");
  if (!(c.beta_coverage > 0 && c.beta_coverage <= 1)) throw InputError("beta_coverage must lie in (0, 1]");
  for (double a : {c.angle_gs_min_rad, c.angle_gs_max_rad, c.angle_tl_min_rad, c.angle_tl_max_rad}) {
    if (!(a > -kPi && a <= kPi)) throw InputError("angle ranges must lie within (-pi, pi]");
  }
  if (c.angle_gs_min_rad > c.angle_gs_max_rad || c.angle_tl_min_rad >= c.angle_tl_max_rad) {
    throw InputError("angle range bounds are reversed");
  }
  // TL is open at its lower end, so touching at gs_max == tl_min is disjoint.
  bool disjoint = c.angle_tl_min_rad >= c.angle_gs_max_rad || c.angle_tl_max_rad < c.angle_gs_min_rad;
  if (!disjoint) throw InputError("go-straight and turn-left angle ranges overlap");
}

/// Go-straight range is closed; turn-left range is (min, max].
inline bool in_gs_range(double a, const ThresholdConfig& c) {
  return a >= c.angle_gs_min_rad && a <= c.angle_gs_max_rad;
}
inline bool in_tl_range(double a, const ThresholdConfig& c) {
  return a > c.angle_tl_min_rad && a <= c.angle_tl_max_rad;
}

/// `key = value` lines, `#` starts a comment. Unknown keys are errors.
inline ThresholdConfig parse_config(std::string_view text) {
  ThresholdConfig c;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    auto trim = [](std::string_view s) {
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
      return s;
    };
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InputError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    bool found = false;
    for (const auto& k : detail::config_keys()) {
      if (key == k.name) {
        if (!parse_double(value, c.*k.field)) {
          throw InputError("config line " + std::to_string(line_no) + ": '" + std::string(value) +
                           "' is not a number");
        }
        found = true;
        break;
      }
    }
    if (!found) throw InputError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  validate(c);
  return c;
}

inline ThresholdConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline std::string to_text(const ThresholdConfig& c) {
  std::string out = "# lawmon threshold configuration\n";
  for (const auto& k : detail::config_keys()) {
    out += k.name;
    out += " = ";
    out += format_double(c.*k.field);
    out += '\n';
  }
  return out;
}

}  // namespace lawmon
