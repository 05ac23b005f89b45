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
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "lawmon/common.hpp"

namespace lawmon {

enum class EventKind { Violation, Advisory };

using Evidence = std::map<std::string, double>;

/// A detected violation or advisory over a maximal run of frames.
struct ViolationEvent {
  EventKind kind = EventKind::Violation;
  std::string article;
  std::string sub_rule;
  ActorId ego_id = 0;
  double start = 0;
  double end = 0;
  Evidence evidence;

  friend bool operator==(const ViolationEvent&, const ViolationEvent&) = default;
};

/// Non-violation notes such as an abandoned overtake.
struct Diagnostic {
  ActorId ego_id = 0;
  double time = 0;
  std::string code;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

struct CatalogueEntry {
  const char* article;
  const char* sub_rule;
  EventKind kind;
};

inline const std::vector<CatalogueEntry>& catalogue() {
  static const std::vector<CatalogueEntry> entries{
      {"78", "SpeedViolation", EventKind::Violation},
      {"80", "FollowingViolation", EventKind::Violation},
      {"82.3", "LngTmOnLine", EventKind::Violation},
      {"44", "FrontViolation", EventKind::Violation},
      {"44", "RearLeftViolation", EventKind::Violation},
      {"44", "FrontLeftViolation", EventKind::Violation},
      {"44", "RearRightViolation", EventKind::Violation},
      {"44", "FrontRightViolation", EventKind::Violation},
      {"44", "LngTmOnLine", EventKind::Violation},
      {"47", "FrontnotOvertake", EventKind::Violation},
      {"47", "FrontViolation", EventKind::Violation},
      {"47", "RearLeftViolation", EventKind::Violation},
      {"47", "FrontLeftViolation", EventKind::Violation},
      {"47", "RearRightViolation", EventKind::Violation},
      {"47", "FrontRightViolation", EventKind::Violation},
      {"47", "LngTmOnLine", EventKind::Violation},
      {"47", "OvertakeonRight", EventKind::Violation},
      {"47", "RecommendedSpeed", EventKind::Advisory},
      {"38.1", "IllegalPass", EventKind::Violation},
      {"38.2", "VirtualLane", EventKind::Violation},
      {"38.2", "UnusualVirtualLane", EventKind::Advisory},
      {"38.3", "ViolationRightofWay", EventKind::Violation},
      {"38.4", "ImpedePedestrian", EventKind::Violation},
  };
  return entries;
}

inline bool in_catalogue(const std::string& article, const std::string& sub_rule, EventKind kind) {
  return std::any_of(catalogue().begin(), catalogue().end(), [&](const CatalogueEntry& e) {
    return article == e.article && sub_rule == e.sub_rule && kind == e.kind;
  });
}

/// Violation types used for report columns, in catalogue order.
inline const std::vector<std::string>& violation_types() {
  static const std::vector<std::string> types = [] {
    std::vector<std::string> out;
    for (const auto& e : catalogue()) {
      if (e.kind == EventKind::Violation && std::find(out.begin(), out.end(), e.article) == out.end()) {
        out.emplace_back(e.article);
      }
    }
    return out;
  }();
  return types;
}

/// Ordering used for merged logs: ego, start, article, sub-rule.
inline bool event_less(const ViolationEvent& a, const ViolationEvent& b) {
  return std::tie(a.ego_id, a.start, a.kind, a.article, a.sub_rule, a.end) <
         std::tie(b.ego_id, b.start, b.kind, b.article, b.sub_rule, b.end);
}

/// Turns a per-frame Boolean into maximal-run events for one rule and ego.
/// A run must last at least `debounce` seconds before it is reported.
class EventTracker {
 public:
  EventTracker(std::string article, std::string sub_rule, EventKind kind, ActorId ego, double debounce = 0.0)
      : article_(std::move(article)), sub_rule_(std::move(sub_rule)), kind_(kind), ego_(ego), debounce_(debounce) {
    if (!in_catalogue(article_, sub_rule_, kind_)) {
      throw MonitorError("rule " + article_ + "/" + sub_rule_ + " is not in the catalogue");
    }
  }

  /// Feeds one frame. Returns the event when it becomes reportable.
  template <class EvidenceFn>
  const ViolationEvent* update(bool active, double t, EvidenceFn&& evidence) {
    if (!active) {
      close();
      return nullptr;
    }
    if (!open_) {
      open_ = ViolationEvent{kind_, article_, sub_rule_, ego_, t, t, evidence()};
      confirmed_ = false;
    }
    open_->end = t;
    if (!confirmed_ && open_->end - open_->start >= debounce_ - 1e-9) {
      confirmed_ = true;
      return &*open_;
    }
    return nullptr;
  }

  const ViolationEvent* update(bool active, double t) {
    return update(active, t, [] { return Evidence{}; });
  }

  void close() {
    if (open_ && confirmed_) done_.push_back(*open_);
    open_.reset();
    confirmed_ = false;
  }

  bool active() const { return open_.has_value() && confirmed_; }
  const std::vector<ViolationEvent>& closed() const { return done_; }

  /// Closed events plus the open one, if reportable.
  std::vector<ViolationEvent> events() const {
    auto out = done_;
    if (open_ && confirmed_) out.push_back(*open_);
    return out;
  }

  const std::string& article() const { return article_; }
  const std::string& sub_rule() const { return sub_rule_; }
  EventKind kind() const { return kind_; }

 private:
  std::string article_;
  std::string sub_rule_;
  EventKind kind_;
  ActorId ego_;
  double debounce_;
  std::optional<ViolationEvent> open_;
  bool confirmed_ = false;
  std::vector<ViolationEvent> done_;
};

}  // namespace lawmon
