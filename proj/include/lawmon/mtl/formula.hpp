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
#include <cstddef>
#include <initializer_list>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lawmon/common.hpp"

namespace lawmon::mtl {

/// Closed time interval [lo, hi] in seconds. `hi` may be +inf.
struct Interval {
  double lo = 0.0;
  double hi = kInfinity;

  bool unbounded() const { return std::isinf(hi); }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Throws InputError unless 0 <= lo <= hi and lo is finite.
inline void validate_interval(const Interval& i) {
  if (!(i.lo >= 0.0) || !std::isfinite(i.lo) || std::isnan(i.hi) || i.hi < i.lo) {
    throw InputError("malformed interval [" + format_double(i.lo) + "," + format_double(i.hi) + "]");
  }
}

enum class Op { True, Atom, Not, And, Or, Iff, Globally, Future, Previously, Once, Until };

inline constexpr bool is_temporal(Op op) {
  return op == Op::Globally || op == Op::Future || op == Op::Previously || op == Op::Once ||
         op == Op::Until;
}

inline constexpr std::size_t arity(Op op) {
  switch (op) {
    case Op::True:
    case Op::Atom:
      return 0;
    case Op::Not:
    case Op::Globally:
    case Op::Future:
    case Op::Previously:
    case Op::Once:
      return 1;
    default:
      return 2;
  }
}

class Formula;

namespace detail {
struct Node {
  Op op;
  std::string atom;
  Interval interval;
  std::vector<Formula> children;
};
}  // namespace detail

/// Immutable MTL syntax tree. Copies share structure.
class Formula {
 public:
  Formula() : node_(true_node()) {}

  Op op() const { return node_->op; }
  const std::string& atom() const { return node_->atom; }
  const Interval& interval() const { return node_->interval; }
  const std::vector<Formula>& children() const { return node_->children; }
  const Formula& child(std::size_t i) const { return node_->children.at(i); }

  static Formula make(Op op, std::string atom, Interval interval, std::vector<Formula> children) {
    if (children.size() != arity(op)) throw InputError("operator arity mismatch");
    if (is_temporal(op)) validate_interval(interval);
    else interval = Interval{};
    auto n = std::make_shared<detail::Node>();
    n->op = op;
    n->atom = std::move(atom);
    n->interval = interval;
    n->children = std::move(children);
    return Formula(std::move(n));
  }

  /// Nesting depth; leaves have depth 0.
  std::size_t depth() const {
    std::size_t d = 0;
    for (const auto& c : children()) d = std::max(d, c.depth() + 1);
    return d;
  }

  bool has_future() const {
    if (op() == Op::Globally || op() == Op::Future || op() == Op::Until) return true;
    for (const auto& c : children()) {
      if (c.has_future()) return true;
    }
    return false;
  }

  /// Atom names in first-occurrence order, without duplicates.
  std::vector<std::string> atoms() const {
    std::vector<std::string> out;
    collect_atoms(out);
    return out;
  }

  friend bool operator==(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return true;
    if (a.op() != b.op() || a.atom() != b.atom() || !(a.interval() == b.interval())) return false;
    return a.children() == b.children();
  }

 private:
  explicit Formula(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}

  static std::shared_ptr<const detail::Node> true_node() {
    static const auto n = std::make_shared<const detail::Node>(detail::Node{Op::True, {}, {}, {}});
    return n;
  }

  void collect_atoms(std::vector<std::string>& out) const {
    if (op() == Op::Atom && std::find(out.begin(), out.end(), atom()) == out.end()) {
      out.push_back(atom());
    }
    for (const auto& c : children()) c.collect_atoms(out);
  }

  std::shared_ptr<const detail::Node> node_;
};

inline Formula top() { return Formula(); }
inline Formula atom(std::string name) { return Formula::make(Op::Atom, std::move(name), {}, {}); }
inline Formula operator!(Formula f) { return Formula::make(Op::Not, {}, {}, {std::move(f)}); }
inline Formula operator&&(Formula a, Formula b) {
  return Formula::make(Op::And, {}, {}, {std::move(a), std::move(b)});
}
inline Formula operator||(Formula a, Formula b) {
  return Formula::make(Op::Or, {}, {}, {std::move(a), std::move(b)});
}
inline Formula iff(Formula a, Formula b) {
  return Formula::make(Op::Iff, {}, {}, {std::move(a), std::move(b)});
}
inline Formula globally(Interval i, Formula f) { return Formula::make(Op::Globally, {}, i, {std::move(f)}); }
inline Formula future(Interval i, Formula f) { return Formula::make(Op::Future, {}, i, {std::move(f)}); }
inline Formula previously(Interval i, Formula f) {
  return Formula::make(Op::Previously, {}, i, {std::move(f)});
}
inline Formula once(Interval i, Formula f) { return Formula::make(Op::Once, {}, i, {std::move(f)}); }
inline Formula until(Formula a, Formula b, Interval i = {}) {
  return Formula::make(Op::Until, {}, i, {std::move(a), std::move(b)});
}

inline bool is_reserved_word(std::string_view s) {
  return s == "T" || s == "U" || s == "G" || s == "F" || s == "P" || s == "O" || s == "inf";
}

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!alpha(s.front())) return false;
  for (char c : s) {
    if (!alpha(c) && !(c >= '0' && c <= '9')) return false;
  }
  return true;
}

/// Declared atomic propositions. Ids are dense and assigned in insertion order.
class AtomRegistry {
 public:
  AtomRegistry() = default;
  AtomRegistry(std::initializer_list<std::string_view> names) {
    for (auto n : names) add(n);
  }

  /// Registers `name` (idempotent) and returns its id.
  std::size_t add(std::string_view name) {
    if (!is_identifier(name) || is_reserved_word(name)) {
      throw InputError("invalid atom name '" + std::string(name) + "'");
    }
    auto it = ids_.find(std::string(name));
    if (it != ids_.end()) return it->second;
    names_.emplace_back(name);
    ids_.emplace(names_.back(), names_.size() - 1);
    return names_.size() - 1;
  }

  std::optional<std::size_t> find(std::string_view name) const {
    auto it = ids_.find(std::string(name));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t id(std::string_view name) const {
    auto i = find(name);
    if (!i) throw InputError("unknown atom '" + std::string(name) + "'");
    return *i;
  }

  bool contains(std::string_view name) const { return find(name).has_value(); }
  const std::string& name(std::size_t id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> ids_;
};

/// Throws InputError if `f` mentions an atom absent from `reg`.
inline void check_bound(const Formula& f, const AtomRegistry& reg) {
  for (const auto& a : f.atoms()) {
    if (!reg.contains(a)) throw InputError("unknown atom '" + a + "'");
  }
}

inline std::string to_string(const Interval& i) {
  return "[" + format_double(i.lo) + "," + (i.unbounded() ? std::string("inf") : format_double(i.hi)) + "]";
}

/// Canonical, fully parenthesized text. Parsing it yields an equal formula.
inline std::string to_string(const Formula& f) {
  switch (f.op()) {
    case Op::True:
      return "T";
    case Op::Atom:
      return f.atom();
    case Op::Not:
      return "!" + to_string(f.child(0));
    case Op::And:
      return "(" + to_string(f.child(0)) + " && " + to_string(f.child(1)) + ")";
    case Op::Or:
      return "(" + to_string(f.child(0)) + " || " + to_string(f.child(1)) + ")";
    case Op::Iff:
      return "(" + to_string(f.child(0)) + " <-> " + to_string(f.child(1)) + ")";
    case Op::Globally:
      return "G" + to_string(f.interval()) + " " + to_string(f.child(0));
    case Op::Future:
      return "F" + to_string(f.interval()) + " " + to_string(f.child(0));
    case Op::Previously:
      return "P" + to_string(f.interval()) + " " + to_string(f.child(0));
    case Op::Once:
      return "O" + to_string(f.interval()) + " " + to_string(f.child(0));
    case Op::Until: {
      const auto& i = f.interval();
      std::string u = (i.lo == 0.0 && i.unbounded()) ? " U " : " U" + to_string(i) + " ";
      return "(" + to_string(f.child(0)) + u + to_string(f.child(1)) + ")";
    }
  }
  return {};
}

}  // namespace lawmon::mtl
