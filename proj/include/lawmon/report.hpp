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
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "lawmon/dataset_io.hpp"
#include "lawmon/events.hpp"

namespace lawmon {

/// Time-binned event statistics. Bins are [k w, (k + 1) w) on recording time
/// and each event lands in the bin holding its start.
struct ViolationReport {
  LogMeta meta;
  double bin_width = 5.0;
  std::vector<std::string> types;                // violation articles, column order
  std::vector<std::vector<std::size_t>> counts;  // [bin][type]
  std::vector<double> proportions;               // per type; empty when there are no violations
  std::map<std::string, std::size_t> sub_rule_counts;  // "article/sub_rule"
  std::map<std::string, std::size_t> advisory_counts;  // "article/sub_rule"
  std::vector<ViolationEvent> violations;
  std::vector<ViolationEvent> advisories;

  std::size_t total() const { return violations.size(); }
  bool proportions_defined() const { return !proportions.empty(); }

  friend bool operator==(const ViolationReport&, const ViolationReport&) = default;
};

inline ViolationReport aggregate_events(const std::vector<ViolationEvent>& events, double bin_width,
                                        const LogMeta& meta = {}) {
  if (!(bin_width > 0) || !std::isfinite(bin_width)) throw InputError("bin width must be positive");
  ViolationReport r;
  r.meta = meta;
  r.bin_width = bin_width;
  r.types = violation_types();
  std::vector<ViolationEvent> sorted = events;
  std::sort(sorted.begin(), sorted.end(), event_less);
  double horizon = meta.end_s;
  for (const auto& e : sorted) {
    if (e.start < 0) throw InputError("event starts before time zero");
    if (e.kind == EventKind::Violation) {
      r.violations.push_back(e);
      horizon = std::max(horizon, e.start);
    } else {
      r.advisories.push_back(e);
      ++r.advisory_counts[e.article + "/" + e.sub_rule];
    }
  }
  auto bin_of = [&](double t) { return static_cast<std::size_t>(std::floor(t / bin_width)); };
  std::size_t n_bins = r.violations.empty() && !(meta.end_s > 0) ? 0 : bin_of(horizon) + 1;
  r.counts.assign(n_bins, std::vector<std::size_t>(r.types.size(), 0));
  std::vector<std::size_t> per_type(r.types.size(), 0);
  for (const auto& e : r.violations) {
    auto it = std::find(r.types.begin(), r.types.end(), e.article);
    if (it == r.types.end()) throw InputError("article " + e.article + " is not a violation type");
    auto col = static_cast<std::size_t>(it - r.types.begin());
    ++r.counts[bin_of(e.start)][col];
    ++per_type[col];
    ++r.sub_rule_counts[e.article + "/" + e.sub_rule];
  }
  if (!r.violations.empty()) {
    for (auto c : per_type) r.proportions.push_back(static_cast<double>(c) / static_cast<double>(r.violations.size()));
  }
  return r;
}

inline Json to_json(const ViolationReport& r) {
  Json bins = Json::array();
  for (std::size_t k = 0; k < r.counts.size(); ++k) {
    Json c = Json::object();
    for (std::size_t i = 0; i < r.types.size(); ++i) c[r.types[i]] = r.counts[k][i];
    bins.push_back({{"start_s", static_cast<double>(k) * r.bin_width}, {"counts", c}});
  }
  Json props = nullptr;
  if (r.proportions_defined()) {
    props = Json::object();
    for (std::size_t i = 0; i < r.types.size(); ++i) props[r.types[i]] = r.proportions[i];
  }
  Json viol = Json::array(), adv = Json::array();
  for (const auto& e : r.violations) viol.push_back(to_json(e));
  for (const auto& e : r.advisories) adv.push_back(to_json(e));
  Json sub = Json::object(), advc = Json::object();
  for (const auto& [k, v] : r.sub_rule_counts) sub[k] = v;
  for (const auto& [k, v] : r.advisory_counts) advc[k] = v;
  return Json{{"metadata",
               {{"scenario", r.meta.scenario},
                {"fragment_id", r.meta.fragment_id},
                {"start_s", r.meta.start_s},
                {"end_s", r.meta.end_s},
                {"egos", r.meta.egos}}},
              {"bin_width_s", r.bin_width},
              {"types", r.types},
              {"total", r.total()},
              {"bins", bins},
              {"proportions", props},
              {"sub_rule_counts", sub},
              {"violations", viol},
              {"advisories", {{"counts", advc}, {"events", adv}}}};
}

inline ViolationReport parse_report(std::string_view text) {
  Json j = detail::parse_json(text);
  ViolationReport r;
  try {
    const Json& m = j.at("metadata");
    r.meta = {m.at("scenario").get<std::string>(), m.at("fragment_id").get<std::string>(),
              m.at("start_s").get<double>(), m.at("end_s").get<double>(), m.at("egos").get<std::size_t>()};
    r.bin_width = j.at("bin_width_s").get<double>();
    r.types = j.at("types").get<std::vector<std::string>>();
    for (const auto& b : j.at("bins")) {
      std::vector<std::size_t> row;
      for (const auto& t : r.types) row.push_back(b.at("counts").at(t).get<std::size_t>());
      r.counts.push_back(row);
    }
    if (!j.at("proportions").is_null()) {
      for (const auto& t : r.types) r.proportions.push_back(j.at("proportions").at(t).get<double>());
    }
    for (const auto& [k, v] : j.at("sub_rule_counts").items()) r.sub_rule_counts[k] = v.get<std::size_t>();
    for (const auto& [k, v] : j.at("advisories").at("counts").items()) r.advisory_counts[k] = v.get<std::size_t>();
    const Json& viol = j.at("violations");
    for (std::size_t i = 0; i < viol.size(); ++i) {
      r.violations.push_back(event_from_json(viol[i], "violations[" + std::to_string(i) + "]"));
    }
    const Json& adv = j.at("advisories").at("events");
    for (std::size_t i = 0; i < adv.size(); ++i) {
      r.advisories.push_back(event_from_json(adv[i], "advisories[" + std::to_string(i) + "]"));
    }
  } catch (const Json::exception& e) {
    throw InputError(std::string("report: ") + e.what());
  }
  return r;
}

/// Bin table: a time column then one column per violation type.
inline std::string to_csv(const ViolationReport& r) {
  std::string out = "time_s";
  for (const auto& t : r.types) out += ",Art_" + t;
  out += '\n';
  for (std::size_t k = 0; k < r.counts.size(); ++k) {
    out += format_double(static_cast<double>(k) * r.bin_width);
    for (auto c : r.counts[k]) out += "," + std::to_string(c);
    out += '\n';
  }
  return out;
}

}  // namespace lawmon
