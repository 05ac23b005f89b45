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
#include <cstddef>
#include <vector>

#include "lawmon/mtl/formula.hpp"
#include "lawmon/mtl/online.hpp"

namespace lawmon::mtl {

namespace detail {

// Direct bottom-up evaluation over the whole trace. Indices past the end are
// unknown, so windows reaching them contribute Pending.
inline std::vector<Verdict3> offline_values(const Formula& f, const std::vector<Sample>& trace,
                                            const AtomRegistry& atoms, double dt) {
  const std::size_t n = trace.size();
  std::vector<Verdict3> out(n, Verdict3::Pending);
  auto cell = [&](const std::vector<Verdict3>& v, long long j) {
    return j < static_cast<long long>(n) ? v[static_cast<std::size_t>(j)] : Verdict3::Pending;
  };
  switch (f.op()) {
    case Op::True:
      out.assign(n, Verdict3::True);
      return out;
    case Op::Atom: {
      std::size_t id = atoms.id(f.atom());
      for (std::size_t k = 0; k < n; ++k) out[k] = v3(trace[k].get(id));
      return out;
    }
    default:
      break;
  }
  std::vector<Verdict3> a = offline_values(f.child(0), trace, atoms, dt);
  std::vector<Verdict3> b;
  if (arity(f.op()) == 2) b = offline_values(f.child(1), trace, atoms, dt);
  const SampleWindow w = is_temporal(f.op()) ? discretize(f.interval(), dt) : SampleWindow{};
  const long long lo = static_cast<long long>(w.lo);
  const long long hi = static_cast<long long>(w.hi);
  const long long nn = static_cast<long long>(n);

  for (long long k = 0; k < nn; ++k) {
    Verdict3 r = Verdict3::Pending;
    switch (f.op()) {
      case Op::Not:
        r = k_not(a[k]);
        break;
      case Op::And:
        r = k_and(a[k], b[k]);
        break;
      case Op::Or:
        r = k_or(a[k], b[k]);
        break;
      case Op::Iff:
        r = (a[k] == Verdict3::Pending || b[k] == Verdict3::Pending) ? Verdict3::Pending : v3(a[k] == b[k]);
        break;
      case Op::Previously:
      case Op::Once: {
        r = Verdict3::False;
        long long first = w.unbounded ? 0 : k - hi;
        for (long long j = std::max(0LL, first); j <= k - lo; ++j) r = k_or(r, a[j]);
        break;
      }
      case Op::Globally:
      case Op::Future: {
        const bool g = f.op() == Op::Globally;
        r = g ? Verdict3::True : Verdict3::False;
        long long last = w.unbounded ? std::max(nn, k + lo) : k + hi;  // nn stands for "beyond the trace"
        for (long long j = k + lo; j <= last; ++j) {
          Verdict3 v = cell(a, j);
          r = g ? k_and(r, v) : k_or(r, v);
          if (j >= nn) break;
        }
        break;
      }
      case Op::Until: {
        r = Verdict3::False;
        long long last = w.unbounded ? std::max(nn, k + lo) : k + hi;
        for (long long j = k + lo; j <= last; ++j) {
          Verdict3 prefix = Verdict3::True;
          for (long long i = k; i < j; ++i) prefix = k_and(prefix, cell(a, i));
          r = k_or(r, k_and(cell(b, j), prefix));
          if (j >= nn) break;
        }
        break;
      }
      default:
        break;
    }
    out[static_cast<std::size_t>(k)] = r;
  }
  return out;
}

}  // namespace detail

/// Reference evaluation over a complete trace. Verdicts whose window runs past
/// the last sample are Pending.
inline std::vector<Verdict> evaluate_offline(const Formula& f, const std::vector<Sample>& trace,
                                             const AtomRegistry& atoms, double dt = 0.04) {
  if (trace.empty()) throw InputError("empty trace");
  check_bound(f, atoms);
  for (std::size_t k = 0; k < trace.size(); ++k) {
    if (trace[k].first_missing() < trace[k].size() || trace[k].size() < atoms.size()) {
      throw InputError("sample " + std::to_string(k) + " is missing an atom value");
    }
    if (k > 0 && !(trace[k].timestamp > trace[k - 1].timestamp)) {
      throw InputError("timestamps must strictly increase (sample " + std::to_string(k) + ")");
    }
  }
  std::vector<Verdict3> vals = detail::offline_values(f, trace, atoms, dt);
  std::vector<Verdict> out(vals.size());
  for (std::size_t k = 0; k < vals.size(); ++k) out[k].value = vals[k];
  return out;
}

}  // namespace lawmon::mtl
