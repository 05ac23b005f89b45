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
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "lawmon/common.hpp"

namespace lawmon {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator-() const { return {-x, -y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 unit(double heading) { return {std::cos(heading), std::sin(heading)}; }
inline Vec2 rotate(Vec2 v, double a) {
  double c = std::cos(a), s = std::sin(a);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

struct Segment {
  Vec2 a;
  Vec2 b;
};

using Polyline = std::vector<Vec2>;

/// Simple polygon, vertices in either orientation.
struct Polygon {
  std::vector<Vec2> pts;
};

/// Rectangle with centre, heading of the length axis, length and width.
struct OrientedBox {
  Vec2 center;
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;

  /// Front-left, rear-left, rear-right, front-right (counter-clockwise).
  std::array<Vec2, 4> corners() const {
    Vec2 u = unit(heading);
    Vec2 n{-u.y, u.x};
    Vec2 hl = u * (length / 2), hw = n * (width / 2);
    return {center + hl + hw, center - hl + hw, center - hl - hw, center + hl - hw};
  }
  Vec2 front_mid() const { return center + unit(heading) * (length / 2); }
  Vec2 rear_mid() const { return center - unit(heading) * (length / 2); }
  Polygon polygon() const {
    auto c = corners();
    return {{c.begin(), c.end()}};
  }
  OrientedBox inflated(double d) const { return {center, heading, length + 2 * d, width + 2 * d}; }
};

inline void require_area(const OrientedBox& b) {
  if (!(b.length > 0.0) || !(b.width > 0.0) || !std::isfinite(b.length) || !std::isfinite(b.width) ||
      !std::isfinite(b.center.x) || !std::isfinite(b.center.y) || !std::isfinite(b.heading)) {
    throw GeometryError("degenerate rectangle (length " + format_double(b.length) + ", width " +
                        format_double(b.width) + ")");
  }
}

/// Point inside or on the boundary of the box.
inline bool contains(const OrientedBox& b, Vec2 p, double tol = 1e-12) {
  Vec2 d = p - b.center;
  Vec2 u = unit(b.heading);
  double s = dot(d, u), t = cross(u, d);
  return std::abs(s) <= b.length / 2 + tol && std::abs(t) <= b.width / 2 + tol;
}

/// Crossing-number test; points on the boundary count as inside.
inline bool contains(const Polygon& poly, Vec2 p, double tol = 1e-9) {
  const auto& v = poly.pts;
  const std::size_t n = v.size();
  if (n < 3) return false;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    Vec2 a = v[j], b = v[i];
    Vec2 ab = b - a;
    double len = norm(ab);
    if (len > 0) {
      double t = std::clamp(dot(p - a, ab) / (len * len), 0.0, 1.0);
      if (norm(p - (a + ab * t)) <= tol) return true;
    }
    if ((a.y > p.y) != (b.y > p.y)) {
      double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

inline double signed_area(const Polygon& poly) {
  double s = 0;
  const auto& v = poly.pts;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) s += cross(v[j], v[i]);
  return v.empty() ? 0.0 : s / 2;
}

inline int orient(Vec2 a, Vec2 b, Vec2 c, double eps = 1e-12) {
  double v = cross(b - a, c - a);
  return v > eps ? 1 : (v < -eps ? -1 : 0);
}

inline bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
         std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

/// Closed-segment intersection, touching included.
inline bool intersects(const Segment& s, const Segment& t) {
  int o1 = orient(s.a, s.b, t.a), o2 = orient(s.a, s.b, t.b);
  int o3 = orient(t.a, t.b, s.a), o4 = orient(t.a, t.b, s.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(s.a, s.b, t.a)) return true;
  if (o2 == 0 && on_segment(s.a, s.b, t.b)) return true;
  if (o3 == 0 && on_segment(t.a, t.b, s.a)) return true;
  if (o4 == 0 && on_segment(t.a, t.b, s.b)) return true;
  return false;
}

inline double distance(Vec2 p, const Segment& s) {
  Vec2 ab = s.b - s.a;
  double l2 = dot(ab, ab);
  if (l2 == 0) return norm(p - s.a);
  double t = std::clamp(dot(p - s.a, ab) / l2, 0.0, 1.0);
  return norm(p - (s.a + ab * t));
}

inline double distance(Vec2 p, const Polyline& line) {
  if (line.size() == 1) return norm(p - line[0]);
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < line.size(); ++i) d = std::min(d, distance(p, Segment{line[i - 1], line[i]}));
  return d;
}

namespace detail {
// Separating-axis test on the edge normals of both convex polygons.
inline bool convex_overlap(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  auto separated = [](const std::vector<Vec2>& p, const std::vector<Vec2>& q) {
    for (std::size_t i = 0, j = p.size() - 1; i < p.size(); j = i++) {
      Vec2 e = p[i] - p[j];
      Vec2 n{-e.y, e.x};
      double amin = kInfinity, amax = -kInfinity, bmin = kInfinity, bmax = -kInfinity;
      for (auto v : p) {
        amin = std::min(amin, dot(v, n));
        amax = std::max(amax, dot(v, n));
      }
      for (auto v : q) {
        bmin = std::min(bmin, dot(v, n));
        bmax = std::max(bmax, dot(v, n));
      }
      double tol = 1e-12 * std::max(1.0, dot(n, n));
      if (amax < bmin - tol || bmax < amin - tol) return true;
    }
    return false;
  };
  return !separated(a, b) && !separated(b, a);
}
}  // namespace detail

inline bool overlap(const OrientedBox& a, const OrientedBox& b) {
  require_area(a);
  require_area(b);
  auto ca = a.corners(), cb = b.corners();
  return detail::convex_overlap({ca.begin(), ca.end()}, {cb.begin(), cb.end()});
}

inline bool overlap(const OrientedBox& b, const Segment& s) {
  require_area(b);
  if (contains(b, s.a) || contains(b, s.b)) return true;
  auto c = b.corners();
  for (std::size_t i = 0; i < 4; ++i) {
    if (intersects(s, Segment{c[i], c[(i + 1) % 4]})) return true;
  }
  return false;
}

inline bool overlap(const Segment& s, const OrientedBox& b) { return overlap(b, s); }

inline bool overlap(const OrientedBox& b, const Polyline& line) {
  require_area(b);
  if (line.size() == 1) return contains(b, line[0]);
  for (std::size_t i = 1; i < line.size(); ++i) {
    if (overlap(b, Segment{line[i - 1], line[i]})) return true;
  }
  return false;
}

/// Convex polygon against box.
inline bool overlap(const OrientedBox& b, const Polygon& convex) {
  require_area(b);
  if (convex.pts.size() < 3) throw GeometryError("polygon needs at least three vertices");
  auto c = b.corners();
  return detail::convex_overlap({c.begin(), c.end()}, convex.pts);
}

/// Lateral offset y(x) = c0 + c1 x + c2 x^2 + c3 x^3, valid for x in [x_min, x_max].
struct Cubic {
  double c0 = 0, c1 = 0, c2 = 0, c3 = 0;
  double x_min = -kInfinity;
  double x_max = kInfinity;

  double operator()(double x) const { return c0 + x * (c1 + x * (c2 + x * c3)); }
  double slope(double x) const { return c1 + x * (2 * c2 + 3 * c3 * x); }
  bool valid_at(double x) const { return x >= x_min && x <= x_max; }
};

/// Box against a cubic lane line. The curve is sampled every `step` metres over
/// the part of its validity range that spans the box, and each chord is tested
/// against the box.
inline bool overlap(const OrientedBox& b, const Cubic& c, double step = 0.1) {
  require_area(b);
  if (!(c.x_max >= c.x_min)) throw GeometryError("empty lane-line validity range");
  auto corners = b.corners();
  double lo = kInfinity, hi = -kInfinity;
  for (auto p : corners) {
    lo = std::min(lo, p.x);
    hi = std::max(hi, p.x);
  }
  lo = std::max(lo, c.x_min);
  hi = std::min(hi, c.x_max);
  if (lo > hi) return false;
  // Exact range of the curve over [lo, hi] against the box's y extent.
  double ylo = std::min(c(lo), c(hi)), yhi = std::max(c(lo), c(hi));
  const double qa = 3 * c.c3, qb = 2 * c.c2, qc = c.c1;
  auto extremum = [&](double x) {
    if (x > lo && x < hi) {
      ylo = std::min(ylo, c(x));
      yhi = std::max(yhi, c(x));
    }
  };
  if (qa != 0) {
    double disc = qb * qb - 4 * qa * qc;
    if (disc >= 0) {
      extremum((-qb + std::sqrt(disc)) / (2 * qa));
      extremum((-qb - std::sqrt(disc)) / (2 * qa));
    }
  } else if (qb != 0) {
    extremum(-qc / qb);
  }
  double by_lo = kInfinity, by_hi = -kInfinity;
  for (auto p : corners) {
    by_lo = std::min(by_lo, p.y);
    by_hi = std::max(by_hi, p.y);
  }
  if (yhi < by_lo || ylo > by_hi) return false;
  Vec2 prev{lo, c(lo)};
  if (contains(b, prev)) return true;
  const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / step)));
  for (int i = 1; i <= n; ++i) {
    double x = i == n ? hi : lo + i * step;
    Vec2 p{x, c(x)};
    if (overlap(b, Segment{prev, p})) return true;
    prev = p;
  }
  return false;
}

/// Keeps the part of `poly` with cross(dir, p - origin) >= 0 (left of the directed line).
inline Polygon clip_left(const Polygon& poly, Vec2 origin, Vec2 dir) {
  Polygon out;
  const auto& v = poly.pts;
  auto side = [&](Vec2 p) { return cross(dir, p - origin); };
  for (std::size_t i = 0; i < v.size(); ++i) {
    Vec2 a = v[i], b = v[(i + 1) % v.size()];
    double sa = side(a), sb = side(b);
    if (sa >= 0) out.pts.push_back(a);
    if ((sa >= 0) != (sb >= 0)) {
      double t = sa / (sa - sb);
      out.pts.push_back(a + (b - a) * t);
    }
  }
  return out;
}

}  // namespace lawmon
