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
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lawmon/mtl/formula.hpp"

namespace lawmon::mtl {

/// Three-valued verdict. Pending means "not decidable from the samples seen so far".
enum class Verdict3 : std::uint8_t { False = 0, True = 1, Pending = 2 };

inline constexpr Verdict3 v3(bool b) { return b ? Verdict3::True : Verdict3::False; }

inline constexpr Verdict3 k_not(Verdict3 a) {
  return a == Verdict3::Pending ? a : (a == Verdict3::True ? Verdict3::False : Verdict3::True);
}
inline constexpr Verdict3 k_and(Verdict3 a, Verdict3 b) {
  if (a == Verdict3::False || b == Verdict3::False) return Verdict3::False;
  if (a == Verdict3::True && b == Verdict3::True) return Verdict3::True;
  return Verdict3::Pending;
}
inline constexpr Verdict3 k_or(Verdict3 a, Verdict3 b) {
  if (a == Verdict3::True || b == Verdict3::True) return Verdict3::True;
  if (a == Verdict3::False && b == Verdict3::False) return Verdict3::False;
  return Verdict3::Pending;
}

inline const char* to_string(Verdict3 v) {
  switch (v) {
    case Verdict3::False:
      return "False";
    case Verdict3::True:
      return "True";
    default:
      return "Pending";
  }
}

struct Verdict {
  Verdict3 value = Verdict3::Pending;
  /// Timestamp of the sample at which the value became known.
  std::optional<double> decided_at;

  bool is_true() const { return value == Verdict3::True; }
  bool is_false() const { return value == Verdict3::False; }
  bool pending() const { return value == Verdict3::Pending; }
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

/// A verdict for an earlier sample that was Pending when that sample arrived.
struct ResolvedVerdict {
  std::size_t index = 0;
  double timestamp = 0.0;
  Verdict verdict;
};

/// One time point: a timestamp and a value for every registered atom.
class Sample {
 public:
  Sample() = default;
  Sample(const AtomRegistry& reg, double t) : timestamp(t), values_(reg.size(), kUnset) {}
  Sample(std::size_t atom_count, double t) : timestamp(t), values_(atom_count, kUnset) {}

  void set(std::size_t id, bool v) { values_.at(id) = v ? 1 : 0; }
  void set(const AtomRegistry& reg, std::string_view name, bool v) { set(reg.id(name), v); }

  bool has(std::size_t id) const { return id < values_.size() && values_[id] != kUnset; }
  bool get(std::size_t id) const {
    if (!has(id)) throw InputError("sample has no value for atom #" + std::to_string(id));
    return values_[id] == 1;
  }
  std::size_t size() const { return values_.size(); }

  /// Index of the first atom without a value, or size() if complete.
  std::size_t first_missing() const {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (values_[i] == kUnset) return i;
    }
    return values_.size();
  }

  double timestamp = 0.0;

 private:
  static constexpr std::int8_t kUnset = -1;
  std::vector<std::int8_t> values_;
};

/// An interval converted to sample offsets.
struct SampleWindow {
  std::size_t lo = 0;
  std::size_t hi = 0;
  bool unbounded = false;
};

/// Converts seconds to sample counts, rounding the lower bound down and the
/// upper bound up.
inline SampleWindow discretize(const Interval& i, double dt) {
  if (!(dt > 0.0)) throw InputError("sampling period must be positive");
  constexpr double kEps = 1e-9;
  SampleWindow w;
  w.lo = static_cast<std::size_t>(std::floor(i.lo / dt + kEps));
  w.unbounded = i.unbounded();
  if (!w.unbounded) {
    double h = std::ceil(i.hi / dt - kEps);
    w.hi = static_cast<std::size_t>(std::max(h, static_cast<double>(w.lo)));
  }
  return w;
}

/// Streaming evaluator for one formula.
///
/// Every call to step() returns the verdict at the new sample. Verdicts that
/// were Pending become available later through take_resolved(). Past-only
/// formulas never return Pending and retain at most the longest past window.
class OnlineEvaluator {
 public:
  OnlineEvaluator(const Formula& f, const AtomRegistry& atoms, double dt = 0.04)
      : dt_(dt), atom_count_(atoms.size()) {
    if (!(dt > 0.0)) throw InputError("sampling period must be positive");
    check_bound(f, atoms);
    root_ = build(f, atoms);
  }

  Verdict step(const Sample& s) {
    if (count_ > 0 && !(s.timestamp > last_t_)) {
      throw InputError("non-monotone timestamp " + format_double(s.timestamp) + " after " +
                       format_double(last_t_));
    }
    if (!std::isfinite(s.timestamp)) throw InputError("non-finite timestamp");
    if (s.size() < atom_count_ || s.first_missing() < s.size()) {
      std::size_t m = std::min(s.first_missing(), s.size());
      throw InputError("sample at t=" + format_double(s.timestamp) + " is missing atom #" + std::to_string(m));
    }
    const std::size_t n = count_;
    sample_ = &s;
    Node& root = nodes_[root_];
    std::vector<std::size_t> root_pending;
    for (std::size_t k = std::max(root.first_pending, root.base); k < n; ++k) {
      if (root.vals[k - root.base] == Verdict3::Pending) root_pending.push_back(k);
    }

    for (std::size_t id = 0; id < nodes_.size(); ++id) {
      Node& nd = nodes_[id];
      for (std::size_t k = std::max(nd.first_pending, nd.base); k < n; ++k) {
        Verdict3& slot = nd.vals[k - nd.base];
        if (slot != Verdict3::Pending) continue;
        Verdict3 v = eval(nd, k, n + 1);
        if (v != Verdict3::Pending) {
          slot = v;
          note_decided(nd, k, v);
        }
      }
      Verdict3 v = eval(nd, n, n + 1);
      nd.vals.push_back(v);
      if (v != Verdict3::Pending) note_decided(nd, n, v);
    }
    count_ = n + 1;
    last_t_ = s.timestamp;
    sample_ = nullptr;
    root_times_.push_back(s.timestamp);

    for (std::size_t k : root_pending) {
      Verdict3 v = root.vals[k - root.base];
      if (v != Verdict3::Pending) resolved_.push_back({k, root_times_[k - times_base_], Verdict{v, s.timestamp}});
    }
    Verdict3 cur = root.vals.back();
    Verdict out{cur, cur == Verdict3::Pending ? std::nullopt : std::optional<double>(s.timestamp)};
    prune();
    return out;
  }

  /// Verdicts for earlier samples that became decided since the last call, in index order.
  std::vector<ResolvedVerdict> take_resolved() {
    std::vector<ResolvedVerdict> out;
    out.swap(resolved_);
    return out;
  }

  /// Number of samples processed.
  std::size_t index() const { return count_; }
  double period() const { return dt_; }

  /// Total number of per-node values currently held in memory.
  std::size_t retained() const {
    std::size_t r = 0;
    for (const auto& nd : nodes_) r += nd.vals.size();
    return r + root_times_.size();
  }

 private:
  struct Node {
    Op op = Op::True;
    std::size_t atom_id = 0;
    SampleWindow w;
    int c0 = -1;
    int c1 = -1;
    std::deque<Verdict3> vals;  // vals[i] is the value at index base + i
    std::size_t base = 0;
    std::size_t first_pending = 0;
    // Unbounded past: child values on [0, past_p) folded into past_acc.
    std::size_t past_p = 0;
    bool past_acc = false;
    // Largest decided index with each value, for unbounded future operators.
    long long max_true = -1;
    long long max_false = -1;
  };

  std::size_t build(const Formula& f, const AtomRegistry& atoms) {
    Node nd;
    nd.op = f.op();
    switch (f.op()) {
      case Op::True:
        break;
      case Op::Atom:
        nd.atom_id = atoms.id(f.atom());
        break;
      case Op::Iff: {
        const Formula& a = f.child(0);
        const Formula& b = f.child(1);
        return build((!a || b) && (a || !b), atoms);
      }
      default:
        if (is_temporal(f.op())) nd.w = discretize(f.interval(), dt_);
        nd.c0 = static_cast<int>(build(f.child(0), atoms));
        if (arity(f.op()) == 2) nd.c1 = static_cast<int>(build(f.child(1), atoms));
        break;
    }
    nodes_.push_back(std::move(nd));
    return nodes_.size() - 1;
  }

  Verdict3 at(const Node& nd, std::size_t k) const {
    if (k >= nd.base + nd.vals.size()) return Verdict3::Pending;
    if (k < nd.base) throw std::logic_error("online evaluator read a pruned value");
    return nd.vals[k - nd.base];
  }

  const Node& child(const Node& nd, int which) const {
    return nodes_[static_cast<std::size_t>(which == 0 ? nd.c0 : nd.c1)];
  }

  static void note_decided(Node& nd, std::size_t k, Verdict3 v) {
    long long ki = static_cast<long long>(k);
    if (v == Verdict3::True) nd.max_true = std::max(nd.max_true, ki);
    else nd.max_false = std::max(nd.max_false, ki);
  }

  // Value of `nd` at index k when `n` samples are known.
  Verdict3 eval(const Node& nd, std::size_t k, std::size_t n) const {
    switch (nd.op) {
      case Op::True:
        return Verdict3::True;
      case Op::Atom:
        return v3(sample_->get(nd.atom_id));
      case Op::Not:
        return k_not(at(child(nd, 0), k));
      case Op::And:
        return k_and(at(child(nd, 0), k), at(child(nd, 1), k));
      case Op::Or:
        return k_or(at(child(nd, 0), k), at(child(nd, 1), k));
      case Op::Previously:
      case Op::Once: {
        const Node& c = child(nd, 0);
        if (k < nd.w.lo) return Verdict3::False;
        if (nd.w.unbounded && nd.past_acc) return Verdict3::True;
        const std::size_t hi = k - nd.w.lo;
        std::size_t lo = nd.past_p;
        if (!nd.w.unbounded) lo = k >= nd.w.hi ? k - nd.w.hi : 0;
        Verdict3 acc = Verdict3::False;
        for (std::size_t j = lo; j <= hi; ++j) {
          acc = k_or(acc, at(c, j));
          if (acc == Verdict3::True) break;
        }
        return acc;
      }
      case Op::Globally:
      case Op::Future: {
        const Node& c = child(nd, 0);
        const bool g = nd.op == Op::Globally;
        const Verdict3 dominant = g ? Verdict3::False : Verdict3::True;
        if (nd.w.unbounded) {
          long long m = g ? c.max_false : c.max_true;
          return m >= static_cast<long long>(k + nd.w.lo) ? dominant : Verdict3::Pending;
        }
        Verdict3 acc = k_not(dominant);
        for (std::size_t j = k + nd.w.lo; j <= k + nd.w.hi; ++j) {
          Verdict3 v = j < n ? at(c, j) : Verdict3::Pending;
          acc = g ? k_and(acc, v) : k_or(acc, v);
          if (acc == dominant) break;
          if (j >= n) break;  // everything further is unknown as well
        }
        return acc;
      }
      case Op::Until: {
        const Node& a = child(nd, 0);
        const Node& b = child(nd, 1);
        Verdict3 prefix = Verdict3::True;
        Verdict3 res = Verdict3::False;
        for (std::size_t j = k;; ++j) {
          if (!nd.w.unbounded && j > k + nd.w.hi) break;
          if (j >= n) {
            if (prefix != Verdict3::False) res = k_or(res, Verdict3::Pending);
            break;
          }
          if (j >= k + nd.w.lo) res = k_or(res, k_and(at(b, j), prefix));
          if (res == Verdict3::True) break;
          prefix = k_and(prefix, at(a, j));
          if (prefix == Verdict3::False) break;
        }
        return res;
      }
      case Op::Iff:
        break;
    }
    throw std::logic_error("unexpanded operator in online evaluator");
  }

  void prune() {
    const std::size_t n = count_;
    Node& root = nodes_[root_];
    advance_first_pending(root);

    std::vector<std::size_t>& need = need_;
    need.assign(nodes_.size(), 0);
    need[root_] = root.first_pending;
    for (std::size_t idx = nodes_.size(); idx-- > 0;) {
      Node& nd = nodes_[idx];
      std::size_t keep = std::min(need[idx], n);
      while (nd.base < keep) {
        nd.vals.pop_front();
        ++nd.base;
      }
      advance_first_pending(nd);
      const std::size_t f = nd.first_pending;
      auto sat = [](long long v) { return v < 0 ? std::size_t{0} : static_cast<std::size_t>(v); };
      switch (nd.op) {
        case Op::Not:
        case Op::And:
        case Op::Or:
        case Op::Until:
          if (nd.c0 >= 0) need[static_cast<std::size_t>(nd.c0)] = f;
          if (nd.c1 >= 0) need[static_cast<std::size_t>(nd.c1)] = f;
          break;
        case Op::Previously:
        case Op::Once: {
          Node& c = nodes_[static_cast<std::size_t>(nd.c0)];
          if (nd.w.unbounded) {
            advance_first_pending(c);
            std::size_t limit = std::min(c.first_pending,
                                         sat(static_cast<long long>(f) - static_cast<long long>(nd.w.lo) + 1));
            limit = std::min(limit, c.base + c.vals.size());
            while (nd.past_p < limit) {
              if (at(c, nd.past_p) == Verdict3::True) nd.past_acc = true;
              ++nd.past_p;
            }
            need[static_cast<std::size_t>(nd.c0)] = nd.past_p;
          } else {
            need[static_cast<std::size_t>(nd.c0)] = sat(static_cast<long long>(f) - static_cast<long long>(nd.w.hi));
          }
          break;
        }
        case Op::Globally:
        case Op::Future:
          need[static_cast<std::size_t>(nd.c0)] = f + nd.w.lo;
          break;
        default:
          break;
      }
    }
    // The root keeps its own pending entries plus their timestamps.
    while (times_base_ < root.base) {
      root_times_.pop_front();
      ++times_base_;
    }
  }

  void advance_first_pending(Node& nd) const {
    std::size_t end = nd.base + nd.vals.size();
    std::size_t k = std::max(nd.first_pending, nd.base);
    while (k < end && nd.vals[k - nd.base] != Verdict3::Pending) ++k;
    nd.first_pending = k;
  }

  double dt_;
  std::size_t atom_count_;
  std::vector<Node> nodes_;  // post-order: children precede parents
  std::size_t root_ = 0;
  std::size_t count_ = 0;
  double last_t_ = 0.0;
  const Sample* sample_ = nullptr;
  std::deque<double> root_times_;
  std::size_t times_base_ = 0;
  std::vector<ResolvedVerdict> resolved_;
  std::vector<std::size_t> need_;
};

}  // namespace lawmon::mtl
