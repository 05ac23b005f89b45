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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lawmon/config.hpp"
#include "lawmon/geometry.hpp"
#include "lawmon/world.hpp"

namespace lawmon {

/// Road ids run 1..4 counter-clockwise around the junction.
inline int wrap_road(int r) { return ((r - 1) % 4 + 4) % 4 + 1; }

/// Exit road reached from `road_in` by a movement.
inline int exit_road(int road_in, DecisionKind d) {
  switch (d) {
    case DecisionKind::GoStraight:
      return wrap_road(road_in + 2);
    case DecisionKind::TurnLeft:
      return wrap_road(road_in - 1);
    case DecisionKind::TurnRight:
      return wrap_road(road_in + 1);
    default:
      throw MonitorError(std::string("'") + to_string(d) + "' is not an intersection movement");
  }
}

/// Polyline with cumulative arc length.
class Path {
 public:
  Path() = default;
  explicit Path(Polyline pts) : pts_(std::move(pts)) {
    if (pts_.size() < 2) throw GeometryError("path needs at least two points");
    cum_.assign(pts_.size(), 0.0);
    for (std::size_t i = 1; i < pts_.size(); ++i) cum_[i] = cum_[i - 1] + norm(pts_[i] - pts_[i - 1]);
    if (cum_.back() <= 0) throw GeometryError("path has zero length");
  }

  const Polyline& points() const { return pts_; }
  double length() const { return cum_.back(); }

  Vec2 at(double s) const {
    auto [i, u] = locate(s);
    return pts_[i] + (pts_[i + 1] - pts_[i]) * u;
  }

  Vec2 tangent(double s) const {
    auto [i, u] = locate(s);
    Vec2 d = pts_[i + 1] - pts_[i];
    return d * (1.0 / norm(d));
  }

  /// Arc length of the closest point on the path.
  double project(Vec2 p) const {
    double best = kInfinity, best_s = 0;
    for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
      Vec2 d = pts_[i + 1] - pts_[i];
      double len2 = dot(d, d);
      double u = len2 > 0 ? std::clamp(dot(p - pts_[i], d) / len2, 0.0, 1.0) : 0.0;
      double dist = norm(pts_[i] + d * u - p);
      if (dist < best) {
        best = dist;
        best_s = cum_[i] + u * (cum_[i + 1] - cum_[i]);
      }
    }
    return best_s;
  }

  /// As project, restricted to the two segments meeting at vertex i.
  double project_near(Vec2 p, std::size_t i) const {
    double best = kInfinity, best_s = 0;
    for (std::size_t k = i > 0 ? i - 1 : 0; k <= i && k + 1 < pts_.size(); ++k) {
      Vec2 d = pts_[k + 1] - pts_[k];
      double len2 = dot(d, d);
      double u = len2 > 0 ? std::clamp(dot(p - pts_[k], d) / len2, 0.0, 1.0) : 0.0;
      double dist = norm(pts_[k] + d * u - p);
      if (dist < best) {
        best = dist;
        best_s = cum_[k] + u * (cum_[k + 1] - cum_[k]);
      }
    }
    return pts_.size() < 2 ? 0.0 : best_s;
  }

  /// Sub-path over [s0, s1], both clamped to the path.
  Path slice(double s0, double s1) const {
    s0 = std::clamp(s0, 0.0, length());
    s1 = std::clamp(s1, 0.0, length());
    Polyline out{at(s0)};
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      if (cum_[i] > s0 && cum_[i] < s1) out.push_back(pts_[i]);
    }
    out.push_back(at(s1));
    return Path(std::move(out));
  }

 private:
  std::pair<std::size_t, double> locate(double s) const {
    s = std::clamp(s, 0.0, length());
    auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    std::size_t i = it == cum_.begin() ? 0 : static_cast<std::size_t>(it - cum_.begin()) - 1;
    i = std::min(i, pts_.size() - 2);
    double seg = cum_[i + 1] - cum_[i];
    return {i, seg > 0 ? (s - cum_[i]) / seg : 0.0};
  }

  Polyline pts_;
  std::vector<double> cum_;
};

/// Band of half-width `half_width` around a path, with flat caps square to the
/// first and last segments.
struct Corridor {
  Path center;
  double half_width = 0.0;

  bool contains(Vec2 p) const {
    const auto& c = center.points();
    Vec2 d0 = c[1] - c[0];
    Vec2 d1 = c.back() - c[c.size() - 2];
    if (dot(p - c.front(), d0) < -1e-9 || dot(p - c.back(), d1) > 1e-9) return false;
    return distance(p, c) <= half_width + 1e-9;
  }

  /// Offset outline, for export and plotting.
  Polygon polygon() const {
    const auto& c = center.points();
    std::vector<Vec2> left, right;
    for (std::size_t i = 0; i < c.size(); ++i) {
      Vec2 d = i == 0 ? c[1] - c[0] : i + 1 == c.size() ? c[i] - c[i - 1] : c[i + 1] - c[i - 1];
      Vec2 n = rotate(d * (1.0 / norm(d)), kPi / 2);
      left.push_back(c[i] + n * half_width);
      right.push_back(c[i] - n * half_width);
    }
    Polygon out{left};
    out.pts.insert(out.pts.end(), right.rbegin(), right.rend());
    return out;
  }
};

/// Entry-to-exit path: straight when the headings are parallel, otherwise
/// straight, circular arc tangent to both lane directions, straight.
inline Path turn_path(Vec2 p0, Vec2 d0, Vec2 p1, Vec2 d1, double step = 0.1) {
  double den = cross(d0, d1);
  if (std::abs(den) < 1e-9) return Path({p0, p1});
  double a = cross(p1 - p0, d1) / den;
  double b = cross(d0, p1 - p0) / den;
  if (a <= 0 || b <= 0) return Path({p0, p1});
  double theta = std::atan2(den, dot(d0, d1));
  double t = std::min(a, b);
  double r = t / std::tan(std::abs(theta) / 2);
  Vec2 t0 = p0 + d0 * (a - t);
  Vec2 t1 = p1 - d1 * (b - t);
  Vec2 c = t0 + rotate(d0, theta > 0 ? kPi / 2 : -kPi / 2) * r;
  Polyline pts{p0};
  if (a - t > 1e-9) pts.push_back(t0);
  int n = std::max(2, static_cast<int>(std::ceil(std::abs(theta) * r / step)));
  Vec2 r0 = t0 - c;
  for (int i = 1; i < n; ++i) pts.push_back(c + rotate(r0, theta * i / n));
  pts.push_back(t1);
  if (b - t > 1e-9) pts.push_back(p1);
  return Path(std::move(pts));
}

/// One lane of an approach. Entry lanes run toward the junction and end at the
/// stop line; exit lanes start at the junction. lane_id 1 is next to the median.
struct MapLane {
  int road_id = 0;
  int lane_id = 0;
  Polyline left;
  Polyline right;
  std::vector<DecisionKind> movements;  // entry lanes; empty allows every movement

  Polyline centerline() const {
    Polyline c;
    for (std::size_t i = 0; i < left.size(); ++i) c.push_back((left[i] + right[i]) * 0.5);
    return c;
  }
  Polygon polygon() const {
    Polygon p{left};
    p.pts.insert(p.pts.end(), right.rbegin(), right.rend());
    return p;
  }
  bool allows(DecisionKind d) const {
    return movements.empty() || std::find(movements.begin(), movements.end(), d) != movements.end();
  }
};

struct MapRoad {
  int road_id = 0;
  std::string light_channel;
  std::vector<MapLane> entry;
  std::vector<MapLane> exit;
  Segment stop_line;
};

struct Crosswalk {
  int id = 0;
  Polygon poly;
};

struct CrosswalkSubArea {
  int crosswalk_id = 0;
  int index = 0;
  Polygon poly;
  std::vector<std::size_t> adjacent;  // indices into IntersectionMap::sub_areas()
};

/// Across an entry lane at the stop line, with the lane heading there.
struct JudgementLine {
  int road_id = 0;
  int lane_id = 0;
  Segment seg;
  double heading = 0.0;
};

/// Derived elements for one (entry lane, movement) pair. `red` selects the
/// red-light partner for right turns.
struct VirtualElements {
  int road_in = 0, lane_in = 0;
  DecisionKind decision = DecisionKind::GoStraight;
  bool red = false;
  int road_out = 0, lane_out = 0;
  Corridor usual;
  std::vector<Corridor> unusual;
  std::optional<Segment> vstopline;
  std::vector<Corridor> check_area;
  int partner_road = 0;  // 0 when the movement has no higher right-of-way flow
  DecisionKind partner_movement = DecisionKind::GoStraight;

  bool in_usual(Vec2 p) const { return usual.contains(p); }
  bool in_unusual(Vec2 p) const {
    return std::any_of(unusual.begin(), unusual.end(), [&](const Corridor& c) { return c.contains(p); });
  }
  bool in_check_area(Vec2 p) const {
    return std::any_of(check_area.begin(), check_area.end(), [&](const Corridor& c) { return c.contains(p); });
  }
};

class IntersectionMap {
 public:
  IntersectionMap() = default;

  /// Validates the raw map and derives the junction area, judgement lines and
  /// crosswalk sub-areas.
  IntersectionMap(std::vector<MapRoad> roads, std::vector<Crosswalk> crosswalks, double lane_width)
      : roads_(std::move(roads)), crosswalks_(std::move(crosswalks)), lane_width_(lane_width) {
    if (!(lane_width_ > 0)) throw GeometryError("lane width must be positive");
    if (roads_.size() != 4) throw GeometryError("an intersection needs exactly four roads");
    std::sort(roads_.begin(), roads_.end(), [](const MapRoad& a, const MapRoad& b) { return a.road_id < b.road_id; });
    for (int i = 0; i < 4; ++i) {
      if (roads_[i].road_id != i + 1) throw GeometryError("road ids must be 1, 2, 3, 4");
    }
    for (auto& r : roads_) check_road(r);
    build_area();
    for (const auto& r : roads_) {
      if (!contains(area_, (r.stop_line.a + r.stop_line.b) * 0.5, 1e-6)) {
        throw GeometryError("stop line of road " + std::to_string(r.road_id) + " does not bound the junction area");
      }
      for (const auto& l : r.entry) {
        Polyline c = l.centerline();
        judgement_.push_back({r.road_id, l.lane_id, {l.left.back(), l.right.back()}, heading_of(c[c.size() - 2], c.back())});
      }
    }
    build_sub_areas();
  }

  const std::vector<MapRoad>& roads() const { return roads_; }
  const std::vector<Crosswalk>& crosswalks() const { return crosswalks_; }
  double lane_width() const { return lane_width_; }
  const Polygon& area() const { return area_; }
  bool in_area(Vec2 p) const { return contains(area_, p); }
  const std::vector<JudgementLine>& judgement_lines() const { return judgement_; }
  const std::vector<CrosswalkSubArea>& sub_areas() const { return sub_areas_; }

  const MapRoad& road(int id) const {
    if (id < 1 || id > 4) throw MonitorError("no road " + std::to_string(id));
    return roads_[static_cast<std::size_t>(id - 1)];
  }

  const MapLane& entry_lane(int road_id, int lane_id) const { return find_lane(road(road_id).entry, road_id, lane_id, "entry"); }
  const MapLane& exit_lane(int road_id, int lane_id) const { return find_lane(road(road_id).exit, road_id, lane_id, "exit"); }

  /// (road, lane) of the entry lane containing p.
  std::optional<std::pair<int, int>> entry_lane_at(Vec2 p) const { return lane_at(p, true); }
  std::optional<std::pair<int, int>> exit_lane_at(Vec2 p) const { return lane_at(p, false); }

  std::optional<std::size_t> sub_area_at(Vec2 p) const {
    for (std::size_t i = 0; i < sub_areas_.size(); ++i) {
      if (contains(sub_areas_[i].poly, p)) return i;
    }
    return std::nullopt;
  }

  /// Exit lane matched to an entry lane: same rank from the median for
  /// straight and left movements, same rank from the kerb for right turns.
  int matched_exit_lane(int road_in, int lane_in, DecisionKind d) const {
    const auto& in = road(road_in).entry;
    const auto& out = road(exit_road(road_in, d)).exit;
    int n_out = static_cast<int>(out.size());
    int k = lane_in;
    if (d == DecisionKind::TurnRight) k = n_out - (static_cast<int>(in.size()) - lane_in);
    k = std::clamp(k, 1, n_out);
    return out[static_cast<std::size_t>(k - 1)].lane_id;
  }

  Corridor virtual_lane(int road_in, int lane_in, int road_out, int lane_out, double half_width, double step = 0.1) const {
    Polyline a = entry_lane(road_in, lane_in).centerline();
    Polyline b = exit_lane(road_out, lane_out).centerline();
    Vec2 d0 = direction(a[a.size() - 2], a.back());
    Vec2 d1 = direction(b[0], b[1]);
    return {turn_path(a.back(), d0, b.front(), d1, step), half_width};
  }

  VirtualElements build_virtual_elements(int road_in, int lane_in, DecisionKind d, bool red,
                                         const ThresholdConfig& cfg) const {
    const MapLane& lane = entry_lane(road_in, lane_in);
    if (!lane.allows(d)) {
      throw MonitorError(std::string(to_string(d)) + " is not allowed from road " + std::to_string(road_in) + " lane " +
                         std::to_string(lane_in));
    }
    double hw = lane_width_ / 2 + cfg.corridor_widening_m;
    VirtualElements ve;
    ve.road_in = road_in;
    ve.lane_in = lane_in;
    ve.decision = d;
    ve.red = red;
    ve.road_out = exit_road(road_in, d);
    ve.lane_out = matched_exit_lane(road_in, lane_in, d);
    ve.usual = virtual_lane(road_in, lane_in, ve.road_out, ve.lane_out, hw, cfg.curve_step_m);
    for (const auto& x : road(ve.road_out).exit) {
      ve.unusual.push_back(virtual_lane(road_in, lane_in, ve.road_out, x.lane_id, hw, cfg.curve_step_m));
    }

    if (d == DecisionKind::TurnLeft) {
      ve.partner_road = wrap_road(road_in + 2);
      ve.partner_movement = DecisionKind::GoStraight;
    } else if (d == DecisionKind::TurnRight && !red) {
      ve.partner_road = wrap_road(road_in + 2);
      ve.partner_movement = DecisionKind::TurnLeft;
    } else if (d == DecisionKind::TurnRight) {
      ve.partner_road = wrap_road(road_in - 1);
      ve.partner_movement = DecisionKind::GoStraight;
    }
    if (ve.partner_road == 0) return ve;

    // First ego station whose corridor overlaps a partner corridor by the
    // configured margin.
    const double hw_partner = lane_width_ / 2 + cfg.corridor_widening_m;
    const double reach = hw + hw_partner - cfg.conflict_overlap_m;
    std::vector<Corridor> partners;
    for (const auto& pl : road(ve.partner_road).entry) {
      if (!pl.allows(ve.partner_movement)) continue;
      int out_road = exit_road(ve.partner_road, ve.partner_movement);
      int out_lane = matched_exit_lane(ve.partner_road, pl.lane_id, ve.partner_movement);
      partners.push_back(virtual_lane(ve.partner_road, pl.lane_id, out_road, out_lane, hw_partner, cfg.curve_step_m));
    }
    const Path& ego = ve.usual.center;
    std::optional<double> s_first;
    for (const auto& c : partners) {
      std::optional<double> s_conflict;
      for (double s = 0; s <= ego.length() + 1e-9; s += cfg.curve_step_m) {
        if (distance(ego.at(s), c.center.points()) <= reach) {
          s_conflict = s;
          break;
        }
      }
      if (!s_conflict) continue;
      if (!s_first || *s_conflict < *s_first) s_first = s_conflict;
      // The partner's own corridor up to the point nearest the conflict.
      double s_h = c.center.project(ego.at(*s_conflict));
      if (s_h <= 0) continue;
      Polyline pts = c.center.slice(0, s_h).points();
      if (cfg.check_area_extension_m > 0) {
        Vec2 d0 = direction(pts[0], pts[1]);
        pts.insert(pts.begin(), pts[0] - d0 * cfg.check_area_extension_m);
      }
      ve.check_area.push_back({Path(std::move(pts)), hw_partner});
    }
    if (!s_first) return ve;
    Vec2 p = ego.at(*s_first);
    Vec2 n = rotate(ego.tangent(*s_first), kPi / 2);
    ve.vstopline = Segment{p + n * hw, p - n * hw};
    return ve;
  }

 private:
  static Vec2 direction(Vec2 a, Vec2 b) {
    Vec2 d = b - a;
    double n = norm(d);
    if (n <= 0) throw GeometryError("repeated point in lane polyline");
    return d * (1.0 / n);
  }
  static double heading_of(Vec2 a, Vec2 b) {
    Vec2 d = b - a;
    return std::atan2(d.y, d.x);
  }

  static const MapLane& find_lane(const std::vector<MapLane>& lanes, int road_id, int lane_id, const char* what) {
    for (const auto& l : lanes) {
      if (l.lane_id == lane_id) return l;
    }
    throw MonitorError("road " + std::to_string(road_id) + " has no " + what + " lane " + std::to_string(lane_id));
  }

  std::optional<std::pair<int, int>> lane_at(Vec2 p, bool entry) const {
    for (const auto& r : roads_) {
      for (const auto& l : entry ? r.entry : r.exit) {
        if (contains(l.polygon(), p)) return std::pair{r.road_id, l.lane_id};
      }
    }
    return std::nullopt;
  }

  void check_road(MapRoad& r) {
    std::string where = "road " + std::to_string(r.road_id);
    if (r.entry.empty()) throw GeometryError(where + " has no entry lanes");
    if (r.exit.empty()) throw GeometryError(where + " has no exit lanes");
    for (auto* lanes : {&r.entry, &r.exit}) {
      std::sort(lanes->begin(), lanes->end(), [](const MapLane& a, const MapLane& b) { return a.lane_id < b.lane_id; });
      for (std::size_t i = 0; i < lanes->size(); ++i) {
        auto& l = (*lanes)[i];
        l.road_id = r.road_id;
        if (l.lane_id != static_cast<int>(i) + 1) throw GeometryError(where + " lane ids must be 1..n");
        if (l.left.size() < 2 || l.left.size() != l.right.size()) {
          throw GeometryError(where + " lane " + std::to_string(l.lane_id) + " needs equal-length left/right lines of 2+ points");
        }
      }
    }
    if (norm(r.stop_line.b - r.stop_line.a) <= 0) throw GeometryError(where + " has a degenerate stop line");
  }

  void build_area() {
    Vec2 lo{kInfinity, kInfinity}, hi{-kInfinity, -kInfinity};
    auto grow = [&](Vec2 p) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    };
    for (const auto& r : roads_) {
      for (const auto* lanes : {&r.entry, &r.exit}) {
        for (const auto& l : *lanes) {
          for (auto p : l.left) grow(p);
          for (auto p : l.right) grow(p);
        }
      }
    }
    double pad = 10 * lane_width_;
    area_.pts = {{lo.x - pad, lo.y - pad}, {hi.x + pad, lo.y - pad}, {hi.x + pad, hi.y + pad}, {lo.x - pad, hi.y + pad}};
    for (const auto& r : roads_) {
      Polyline c = r.entry.front().centerline();
      Vec2 d = direction(c[c.size() - 2], c.back());  // points into the junction
      area_ = clip_left(area_, r.stop_line.a, rotate(d, -kPi / 2));
    }
    if (area_.pts.size() < 3 || std::abs(signed_area(area_)) < 1e-6) {
      throw GeometryError("stop lines do not enclose a junction area");
    }
    for (const auto& cw : crosswalks_) {
      if (cw.poly.pts.size() != 4) throw GeometryError("crosswalk " + std::to_string(cw.id) + " must be a rectangle");
      for (auto p : cw.poly.pts) {
        if (p.x < lo.x - pad || p.x > hi.x + pad || p.y < lo.y - pad || p.y > hi.y + pad) {
          throw GeometryError("crosswalk " + std::to_string(cw.id) + " lies outside the road bounds");
        }
      }
    }
  }

  // Cuts each crosswalk along its long side into lane-width pieces; the last
  // piece is shorter when the length is not a multiple of the lane width.
  void build_sub_areas() {
    for (const auto& cw : crosswalks_) {
      const auto& c = cw.poly.pts;
      Vec2 e1 = c[1] - c[0], e3 = c[3] - c[0];
      Vec2 origin = c[0], along = e1, across = e3;
      if (norm(e3) > norm(e1)) std::swap(along, across);
      double len = norm(along);
      Vec2 u = along * (1.0 / len);
      int n = std::max(1, static_cast<int>(std::ceil(len / lane_width_ - 1e-9)));
      std::size_t first = sub_areas_.size();
      for (int i = 0; i < n; ++i) {
        double s0 = i * lane_width_, s1 = std::min(len, (i + 1) * lane_width_);
        Vec2 a = origin + u * s0, b = origin + u * s1;
        CrosswalkSubArea sa;
        sa.crosswalk_id = cw.id;
        sa.index = i;
        sa.poly.pts = {a, b, b + across, a + across};
        if (i > 0) sa.adjacent.push_back(first + i - 1);
        if (i + 1 < n) sa.adjacent.push_back(first + i + 1);
        sub_areas_.push_back(std::move(sa));
      }
    }
  }

  std::vector<MapRoad> roads_;
  std::vector<Crosswalk> crosswalks_;
  double lane_width_ = 3.5;
  Polygon area_;
  std::vector<JudgementLine> judgement_;
  std::vector<CrosswalkSubArea> sub_areas_;
};

}  // namespace lawmon
