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
#include <cctype>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lawmon/events.hpp"
#include "lawmon/mtl/online.hpp"
#include "lawmon/mtl/parser.hpp"

namespace lawmon {

/// A named judgement. The formula is true on violating (or advisory) frames.
struct Rule {
  std::string name;
  std::string article;
  std::string sub_rule;
  EventKind kind = EventKind::Violation;
  mtl::Formula formula;
};

/// Splits `art82_3_LngTmOnLine` into article "82.3" and sub-rule "LngTmOnLine".
inline std::pair<std::string, std::string> split_rule_name(std::string_view name) {
  auto bad = [&] { return InputError("rule name '" + std::string(name) + "' is not of the form art<NN>[_<N>]_<SubRule>"); };
  if (name.substr(0, 3) != "art") throw bad();
  std::size_t i = 3;
  auto digits = [&] {
    std::size_t s = i;
    while (i < name.size() && std::isdigit(static_cast<unsigned char>(name[i]))) ++i;
    return name.substr(s, i - s);
  };
  std::string article(digits());
  if (article.empty() || i >= name.size() || name[i] != '_') throw bad();
  ++i;
  if (i < name.size() && std::isdigit(static_cast<unsigned char>(name[i]))) {
    article += '.';
    article += digits();
    if (i >= name.size() || name[i] != '_') throw bad();
    ++i;
  }
  std::string sub(name.substr(i));
  if (sub.empty() || !std::isalpha(static_cast<unsigned char>(sub[0]))) throw bad();
  return {article, sub};
}

/// Parses a rule file against an atom registry and resolves every name in
/// the event catalogue.
inline std::vector<Rule> parse_rules(std::string_view text, const mtl::AtomRegistry& atoms) {
  std::vector<Rule> out;
  for (auto& nf : mtl::parse_formula_file(text, atoms)) {
    auto [article, sub] = split_rule_name(nf.name);
    const CatalogueEntry* hit = nullptr;
    for (const auto& e : catalogue()) {
      if (article == e.article && sub == e.sub_rule) hit = &e;
    }
    if (!hit) {
      throw InputError("rule '" + nf.name + "' (line " + std::to_string(nf.line) + ") is not a catalogued rule");
    }
    for (const auto& r : out) {
      if (r.name == nf.name) throw InputError("rule '" + nf.name + "' defined twice");
    }
    out.push_back({nf.name, article, sub, hit->kind, std::move(nf.formula)});
  }
  if (out.empty()) throw InputError("rule file defines no rules");
  return out;
}

/// Online evaluators plus event trackers for one ego stream.
class RuleEngine {
 public:
  RuleEngine(const std::vector<Rule>& rules, const mtl::AtomRegistry& atoms, double dt, ActorId ego,
             double debounce)
      : rules_(rules) {
    evaluators_.reserve(rules.size());
    trackers_.reserve(rules.size());
    for (const auto& r : rules_) {
      evaluators_.emplace_back(r.formula, atoms, dt);
      trackers_.emplace_back(r.article, r.sub_rule, r.kind, ego, debounce);
    }
    verdicts_.assign(rules_.size(), false);
  }

  /// Steps every rule. A pending verdict counts as "no violation yet".
  /// `evidence(rule)` is called only when an event opens.
  template <class EvidenceFn>
  void step(const mtl::Sample& s, EvidenceFn&& evidence, std::vector<ViolationEvent>& opened) {
    for (std::size_t i = 0; i < rules_.size(); ++i) {
      mtl::Verdict v = evaluators_[i].step(s);
      evaluators_[i].take_resolved();
      bool on = v.is_true();
      verdicts_[i] = on;
      const Rule& r = rules_[i];
      if (const ViolationEvent* e = trackers_[i].update(on, s.timestamp, [&] { return evidence(r); })) {
        opened.push_back(*e);
      }
    }
  }

  void finish() {
    for (auto& t : trackers_) t.close();
  }

  std::vector<ViolationEvent> events() const {
    std::vector<ViolationEvent> out;
    for (const auto& t : trackers_) {
      auto e = t.events();
      out.insert(out.end(), e.begin(), e.end());
    }
    std::sort(out.begin(), out.end(), event_less);
    return out;
  }

  const std::vector<Rule>& rules() const { return rules_; }
  /// Verdict of rule i at the last step.
  bool verdict(std::size_t i) const { return verdicts_[i]; }
  bool verdict(std::string_view name) const {
    for (std::size_t i = 0; i < rules_.size(); ++i) {
      if (rules_[i].name == name) return verdicts_[i];
    }
    throw MonitorError("no rule named '" + std::string(name) + "'");
  }

 private:
  std::vector<Rule> rules_;
  std::vector<mtl::OnlineEvaluator> evaluators_;
  std::vector<EventTracker> trackers_;
  std::vector<bool> verdicts_;
};

}  // namespace lawmon
