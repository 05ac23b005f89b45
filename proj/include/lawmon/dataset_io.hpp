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

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "json.hpp"
#include "lawmon/config.hpp"
#include "lawmon/decision_inference.hpp"
#include "lawmon/events.hpp"
#include "lawmon/intersection_map.hpp"
#include "lawmon/world.hpp"

namespace lawmon {

using Json = nlohmann::ordered_json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Trajectories

struct ActorSample {
  ActorId id = 0;
  ActorClass cls = ActorClass::Car;
  double x = 0, y = 0;
  double vx = 0, vy = 0;
  double ax = 0, ay = 0;
  double heading = 0;
  double length = 0, width = 0;
  std::optional<DecisionKind> decision;
};

struct RecordedFrame {
  long frame = 0;
  double t = 0;
  std::vector<ActorSample> actors;  // sorted by id
};

struct LightSample {
  double t = 0;
  std::string channel;
  TrafficLight state = TrafficLight::Red;
};

/// A whole recording in SI units. Frames are sorted by time.
struct Recording {
  std::string fragment_id;
  double rate_hz = 25.0;
  std::vector<RecordedFrame> frames;
  std::vector<LightSample> lights;  // sorted by time

  std::vector<ActorId> ids() const {
    std::set<ActorId> s;
    for (const auto& f : frames) {
      for (const auto& a : f.actors) s.insert(a.id);
    }
    return {s.begin(), s.end()};
  }

  /// Vehicle ids only (no pedestrians).
  std::vector<ActorId> vehicle_ids() const {
    std::set<ActorId> s;
    for (const auto& f : frames) {
      for (const auto& a : f.actors) {
        if (a.cls != ActorClass::Pedestrian) s.insert(a.id);
      }
    }
    return {s.begin(), s.end()};
  }

  static const ActorSample* find(const RecordedFrame& f, ActorId id) {
    auto it = std::lower_bound(f.actors.begin(), f.actors.end(), id,
                               [](const ActorSample& a, ActorId v) { return a.id < v; });
    return it != f.actors.end() && it->id == id ? &*it : nullptr;
  }

  /// Light state of a channel at time t: the last sample at or before t.
  std::optional<TrafficLight> light_at(const std::string& channel, double t) const {
    std::optional<TrafficLight> out;
    for (const auto& l : lights) {
      if (l.t > t + 1e-9) break;
      if (l.channel == channel) out = l.state;
    }
    return out;
  }
};

/// Where a canonical field comes from and in which unit.
struct ColumnSpec {
  std::string column;
  std::string unit;  // "" for SI; km/h, ms, deg, ...
};

/// Source-column mapping. Canonical fields: id, frame, time, class, x, y, vx,
/// vy, ax, ay, heading, length, width, decision.
struct TrajectorySchema {
  std::string name;
  std::map<std::string, ColumnSpec> fields;
  bool strict = false;          // unknown columns are errors
  bool xy_is_top_left = false;  // x, y give the bounding-box corner with min x, min y
  double rate_hz = 25.0;        // used when there is no time column
};

inline double unit_scale(const std::string& unit) {
  if (unit.empty() || unit == "m" || unit == "m/s" || unit == "m/s2" || unit == "s" || unit == "rad") return 1.0;
  if (unit == "km/h") return 1.0 / 3.6;
  if (unit == "ms") return 1e-3;
  if (unit == "deg") return kPi / 180.0;
  if (unit == "cm") return 0.01;
  throw InputError("unknown unit '" + unit + "'");
}

inline TrajectorySchema canonical_schema() {
  TrajectorySchema s;
  s.name = "canonical";
  s.strict = true;
  for (const char* f : {"id", "frame", "time", "class", "x", "y", "vx", "vy", "ax", "ay", "heading", "length", "width",
                        "decision"}) {
    s.fields[f] = {f, ""};
  }
  return s;
}

/// highD-style drone layout: bounding-box corner positions, box "width" along
/// x and "height" across, frame numbers at a fixed rate.
inline TrajectorySchema ad4che_like_schema(double rate_hz = 25.0) {
  TrajectorySchema s;
  s.name = "ad4che";
  s.xy_is_top_left = true;
  s.rate_hz = rate_hz;
  s.fields = {{"id", {"id", ""}},
              {"frame", {"frame", ""}},
              {"x", {"x", ""}},
              {"y", {"y", ""}},
              {"length", {"width", ""}},
              {"width", {"height", ""}},
              {"vx", {"xVelocity", ""}},
              {"vy", {"yVelocity", ""}},
              {"ax", {"xAcceleration", ""}},
              {"ay", {"yAcceleration", ""}},
              {"heading", {"orientation", "deg"}},
              {"class", {"class", ""}}};
  return s;
}

/// Intersection layout with per-track rows and millisecond timestamps.
inline TrajectorySchema sind_like_schema() {
  TrajectorySchema s;
  s.name = "sind";
  s.fields = {{"id", {"track_id", ""}},
              {"frame", {"frame_id", ""}},
              {"time", {"timestamp_ms", "ms"}},
              {"class", {"agent_type", ""}},
              {"x", {"x", ""}},
              {"y", {"y", ""}},
              {"vx", {"vx", ""}},
              {"vy", {"vy", ""}},
              {"ax", {"ax", ""}},
              {"ay", {"ay", ""}},
              {"heading", {"heading_rad", ""}},
              {"length", {"length", ""}},
              {"width", {"width", ""}}};
  return s;
}

inline TrajectorySchema schema_by_name(std::string_view name) {
  if (name == "canonical") return canonical_schema();
  if (name == "ad4che") return ad4che_like_schema();
  if (name == "sind") return sind_like_schema();
  throw InputError("unknown trajectory schema '" + std::string(name) + "' (canonical, ad4che, sind)");
}

inline ActorClass parse_actor_class(std::string_view s) {
  std::string v(s);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "pedestrian" || v == "ped") return ActorClass::Pedestrian;
  if (v == "truck" || v == "bus") return ActorClass::Truck;
  return ActorClass::Car;
}

namespace detail {

inline void split_csv(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      std::string_view f = line.substr(start, i - start);
      while (!f.empty() && (f.front() == ' ' || f.front() == '"')) f.remove_prefix(1);
      while (!f.empty() && (f.back() == ' ' || f.back() == '"' || f.back() == '\r')) f.remove_suffix(1);
      out.push_back(f);
      start = i + 1;
    }
  }
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  split_csv(line, out);
  return out;
}

/// Acceleration by 3-point differences of velocity, one-sided at the ends.
inline std::vector<double> differentiate(const std::vector<double>& t, const std::vector<double>& v) {
  std::size_t n = v.size();
  std::vector<double> a(n, 0.0);
  if (n == 2) a[0] = a[1] = (v[1] - v[0]) / (t[1] - t[0]);
  if (n < 3) return a;
  for (std::size_t k = 1; k + 1 < n; ++k) a[k] = (v[k + 1] - v[k - 1]) / (t[k + 1] - t[k - 1]);
  double h0 = (t[2] - t[0]) / 2, h1 = (t[n - 1] - t[n - 3]) / 2;
  a[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h0);
  a[n - 1] = (3 * v[n - 1] - 4 * v[n - 2] + v[n - 3]) / (2 * h1);
  return a;
}

}  // namespace detail

/// Parses trajectory CSV text. Errors name the 1-based line number.
inline Recording parse_trajectories(std::string_view text, const TrajectorySchema& schema,
                                    std::string fragment_id = "") {
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  std::size_t first = 0;
  while (first < lines.size() && (lines[first].empty() || lines[first][0] == '#')) ++first;
  if (first == lines.size()) throw InputError("trajectory file has no header");
  auto header = detail::split_csv(lines[first]);
  std::map<std::string, std::size_t, std::less<>> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[std::string(header[i])] = i;

  std::map<std::string, std::pair<std::size_t, double>> idx;  // canonical -> (column, scale)
  for (const auto& [field, spec] : schema.fields) {
    auto it = col.find(spec.column);
    if (it != col.end()) idx[field] = {it->second, unit_scale(spec.unit)};
  }
  if (schema.strict) {
    std::set<std::string> known;
    for (const auto& [f, spec] : schema.fields) known.insert(spec.column);
    for (auto h : header) {
      if (!known.count(std::string(h))) throw InputError("unknown column '" + std::string(h) + "'");
    }
  }
  for (const char* m : {"id", "x", "y", "vx", "vy", "width", "length"}) {
    if (!idx.count(m)) throw InputError("missing mandatory column for '" + std::string(m) + "'");
  }
  if (!idx.count("frame") && !idx.count("time")) throw InputError("missing mandatory column for 'frame' or 'time'");
  bool has_acc = idx.count("ax") && idx.count("ay");

  struct Row {
    long frame;
    double t;
    ActorSample a;
  };
  // Column lookups resolved once; kNames order matches the slots below.
  static constexpr const char* kNames[] = {"id",     "frame", "time",  "x",       "y",     "vx",       "vy",
                                           "length", "width", "ax",    "ay",      "heading", "class", "decision"};
  constexpr std::size_t kSlots = std::size(kNames);
  std::array<std::optional<std::pair<std::size_t, double>>, kSlots> slot;
  for (std::size_t i = 0; i < kSlots; ++i) {
    if (auto it = idx.find(kNames[i]); it != idx.end()) slot[i] = it->second;
  }
  auto slot_of = [&](const char* name) {
    for (std::size_t i = 0; i < kSlots; ++i) {
      if (kNames[i] == name || std::string_view(kNames[i]) == name) return i;
    }
    throw std::logic_error("unknown field");
  };

  std::vector<Row> rows;
  rows.reserve(lines.size());
  std::vector<std::string_view> f;
  for (std::size_t li = first + 1; li < lines.size(); ++li) {
    std::string_view line = lines[li];
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    detail::split_csv(line, f);
    std::size_t line_no = li + 1;
    auto field = [&](const char* name) -> std::optional<std::string_view> {
      const auto& sl = slot[slot_of(name)];
      if (!sl) return std::nullopt;
      if (sl->first >= f.size()) throw InputError("line " + std::to_string(line_no) + ": too few fields");
      return f[sl->first];
    };
    auto number = [&](const char* name) -> std::optional<double> {
      auto s = field(name);
      if (!s) return std::nullopt;
      if (s->empty()) {
        if (std::string_view(name) == "decision" || std::string_view(name) == "class") return std::nullopt;
        throw InputError("line " + std::to_string(line_no) + ": missing value for '" + name + "'");
      }
      double v;
      if (!parse_double(*s, v)) {
        throw InputError("line " + std::to_string(line_no) + ": cannot parse '" + std::string(*s) + "' as " + name);
      }
      return v * slot[slot_of(name)]->second;
    };
    Row r{};
    r.a.id = static_cast<ActorId>(*number("id"));
    auto fr = number("frame");
    auto tm = number("time");
    r.frame = fr ? std::lround(*fr) : -1;
    r.t = tm ? *tm : static_cast<double>(r.frame) / schema.rate_hz;
    r.a.x = *number("x");
    r.a.y = *number("y");
    r.a.vx = *number("vx");
    r.a.vy = *number("vy");
    r.a.length = *number("length");
    r.a.width = *number("width");
    if (schema.xy_is_top_left) {
      r.a.x += r.a.length / 2;
      r.a.y += r.a.width / 2;
    }
    if (has_acc) {
      r.a.ax = *number("ax");
      r.a.ay = *number("ay");
    }
    if (auto h = number("heading")) {
      r.a.heading = wrap_angle(*h);
    } else {
      r.a.heading = std::atan2(r.a.vy, r.a.vx);
    }
    if (auto c = field("class"); c && !c->empty()) r.a.cls = parse_actor_class(*c);
    if (auto d = field("decision"); d && !d->empty()) {
      try {
        r.a.decision = parse_decision(*d);
      } catch (const InputError& e) {
        throw InputError("line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (r.a.cls != ActorClass::Pedestrian && (!(r.a.length > 0) || !(r.a.width > 0))) {
      throw InputError("line " + std::to_string(line_no) + ": vehicle dimensions must be positive");
    }
    if (!fr) r.frame = -1;
    rows.push_back(r);
  }
  if (rows.empty()) throw InputError("trajectory file has no rows");

  // Per-actor monotonicity and finite-difference accelerations.
  std::map<ActorId, std::vector<std::size_t>> by_actor;
  for (std::size_t i = 0; i < rows.size(); ++i) by_actor[rows[i].a.id].push_back(i);
  for (auto& [id, ix] : by_actor) {
    for (std::size_t k = 1; k < ix.size(); ++k) {
      if (!(rows[ix[k]].t > rows[ix[k - 1]].t)) {
        throw InputError("actor " + std::to_string(id) + ": non-monotone frame index at t=" +
                         format_double(rows[ix[k]].t));
      }
    }
    if (!has_acc) {
      std::vector<double> t, vx, vy;
      for (auto i : ix) {
        t.push_back(rows[i].t);
        vx.push_back(rows[i].a.vx);
        vy.push_back(rows[i].a.vy);
      }
      auto ax = detail::differentiate(t, vx), ay = detail::differentiate(t, vy);
      for (std::size_t k = 0; k < ix.size(); ++k) {
        rows[ix[k]].a.ax = ax[k];
        rows[ix[k]].a.ay = ay[k];
      }
    }
  }

  std::map<double, RecordedFrame> frames;
  for (auto& r : rows) {
    auto& f = frames[r.t];
    f.t = r.t;
    f.frame = r.frame;
    f.actors.push_back(r.a);
  }
  Recording rec;
  rec.fragment_id = std::move(fragment_id);
  for (auto& [t, f] : frames) {
    std::sort(f.actors.begin(), f.actors.end(), [](const ActorSample& a, const ActorSample& b) { return a.id < b.id; });
    rec.frames.push_back(std::move(f));
  }
  // Constant period: every step is a whole multiple of the smallest one.
  double period = kInfinity;
  for (std::size_t i = 1; i < rec.frames.size(); ++i) period = std::min(period, rec.frames[i].t - rec.frames[i - 1].t);
  if (rec.frames.size() > 1) {
    for (std::size_t i = 1; i < rec.frames.size(); ++i) {
      double m = (rec.frames[i].t - rec.frames[i - 1].t) / period;
      if (std::abs(m - std::round(m)) > 1e-3) {
        throw InputError("sampling period is not constant near t=" + format_double(rec.frames[i].t));
      }
    }
    rec.rate_hz = 1.0 / period;
  } else {
    rec.rate_hz = schema.rate_hz;
  }
  for (auto& f : rec.frames) {
    if (f.frame < 0) f.frame = std::lround(f.t * rec.rate_hz);
  }
  return rec;
}

inline Recording load_trajectories(const std::string& path, const TrajectorySchema& schema) {
  try {
    return parse_trajectories(read_file(path), schema, path);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

/// Light timeline CSV: `time,channel,state` with state R/G/Y.
inline std::vector<LightSample> parse_lights(std::string_view text) {
  std::vector<LightSample> out;
  std::size_t line_no = 0;
  bool header = true;
  for (std::size_t pos = 0; pos < text.size();) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line[0] == '#') continue;
    auto f = detail::split_csv(line);
    if (header) {
      if (f.size() != 3 || f[0] != "time" || f[1] != "channel" || f[2] != "state") {
        throw InputError("line " + std::to_string(line_no) + ": light header must be 'time,channel,state'");
      }
      header = false;
      continue;
    }
    if (f.size() != 3) throw InputError("line " + std::to_string(line_no) + ": expected 3 fields");
    LightSample l;
    if (!parse_double(f[0], l.t)) throw InputError("line " + std::to_string(line_no) + ": bad time");
    l.channel = std::string(f[1]);
    try {
      l.state = parse_light(f[2]);
    } catch (const InputError& e) {
      throw InputError("line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(l);
  }
  std::stable_sort(out.begin(), out.end(), [](const LightSample& a, const LightSample& b) { return a.t < b.t; });
  return out;
}

// ---------------------------------------------------------------------------
// Maps

struct HighwayLine {
  int id = 0;
  LineType type = LineType::Dashed;
  Polyline points;  // resampled, travel direction
};

struct SpeedSignZone {
  double from = 0, to = 0;  // stations along line 1
  double v_min_kmh = 60, v_max_kmh = 120;
};

/// Lane lines 1..N+1 from the inner (left) edge outward; lane i lies between
/// lines i and i+1.
struct HighwayMap {
  std::vector<HighwayLine> lines;
  std::vector<RoadType> lane_types;  // index lane_id - 1
  int n_mainway = 0;
  std::vector<SpeedSignZone> signs;
  Path reference;  // line 1
};

namespace detail {

inline Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    std::size_t line = 1, col = 0;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 0;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    auto p = what.find("error: ");
    throw ParseError(line, col, p == std::string::npos ? what : what.substr(p + 7));
  }
}

inline Vec2 point(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw InputError(where + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Polyline polyline(const Json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected a list of points");
  Polyline out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(point(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline const Json& req(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw InputError(where + ": missing '" + key + "'");
  return j.at(key);
}

template <class T>
T get(const Json& j, const char* key, const std::string& where) {
  const Json& v = req(j, key, where);
  try {
    return v.get<T>();
  } catch (const Json::exception&) {
    throw InputError(where + ": '" + key + "' has the wrong type");
  }
}

inline Polyline resample(const Polyline& p, double step) {
  Path path(p);
  Polyline out;
  int n = std::max(1, static_cast<int>(std::ceil(path.length() / step)));
  for (int i = 0; i <= n; ++i) out.push_back(path.at(path.length() * i / n));
  return out;
}

}  // namespace detail

inline HighwayMap parse_highway_map(const Json& j) {
  HighwayMap m;
  const Json& lines = detail::req(j, "lane_lines", "map");
  if (!lines.is_array() || lines.size() < 2) throw InputError("map: need at least two lane lines");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string where = "lane_lines[" + std::to_string(i) + "]";
    HighwayLine l;
    l.id = detail::get<int>(lines[i], "id", where);
    std::string type = lines[i].value("type", "dashed");
    if (type == "solid") {
      l.type = LineType::Solid;
    } else if (type == "dashed") {
      l.type = LineType::Dashed;
    } else {
      throw InputError(where + ": line type must be solid or dashed");
    }
    Polyline pts = detail::polyline(detail::req(lines[i], "points", where), where + ".points");
    if (pts.size() < 2) throw InputError(where + ": need at least two points");
    try {
      l.points = detail::resample(pts, 4.0);
    } catch (const GeometryError& e) {
      throw InputError(where + ": " + e.what());
    }
    m.lines.push_back(std::move(l));
  }
  std::sort(m.lines.begin(), m.lines.end(), [](const HighwayLine& a, const HighwayLine& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < m.lines.size(); ++i) {
    if (m.lines[i].id != static_cast<int>(i) + 1) throw InputError("map: lane line ids must be 1..N+1");
  }
  std::size_t n_lanes = m.lines.size() - 1;
  m.lane_types.assign(n_lanes, RoadType::Mainway);
  if (j.contains("lanes")) {
    for (const auto& l : j.at("lanes")) {
      int id = detail::get<int>(l, "id", "lanes");
      if (id < 1 || static_cast<std::size_t>(id) > n_lanes) throw InputError("lanes: id " + std::to_string(id) + " out of range");
      m.lane_types[static_cast<std::size_t>(id - 1)] = parse_road_type(detail::get<std::string>(l, "road_type", "lanes"));
    }
  }
  m.n_mainway = static_cast<int>(std::count(m.lane_types.begin(), m.lane_types.end(), RoadType::Mainway));
  if (j.contains("n_mainway_lanes")) m.n_mainway = j.at("n_mainway_lanes").get<int>();
  if (j.contains("speed_signs")) {
    for (const auto& s : j.at("speed_signs")) {
      SpeedSignZone z;
      z.from = detail::get<double>(s, "from", "speed_signs");
      z.to = detail::get<double>(s, "to", "speed_signs");
      z.v_min_kmh = detail::get<double>(s, "v_min_kmh", "speed_signs");
      z.v_max_kmh = detail::get<double>(s, "v_max_kmh", "speed_signs");
      if (!(z.to > z.from) || !(z.v_max_kmh > z.v_min_kmh)) throw InputError("speed_signs: empty zone or speed band");
      m.signs.push_back(z);
    }
  }
  m.reference = Path(m.lines.front().points);
  return m;
}

inline IntersectionMap parse_intersection_map(const Json& j) {
  double w = detail::get<double>(j, "lane_width", "map");
  std::vector<MapRoad> roads;
  const Json& rs = detail::req(j, "roads", "map");
  for (std::size_t i = 0; i < rs.size(); ++i) {
    std::string where = "roads[" + std::to_string(i) + "]";
    MapRoad r;
    r.road_id = detail::get<int>(rs[i], "road_id", where);
    r.light_channel = rs[i].value("light_channel", std::to_string(r.road_id));
    Polyline sl = detail::polyline(detail::req(rs[i], "stop_line", where), where + ".stop_line");
    if (sl.size() != 2) throw InputError(where + ": stop_line needs two points");
    r.stop_line = {sl[0], sl[1]};
    for (const char* key : {"entry_lanes", "exit_lanes"}) {
      const Json& ls = detail::req(rs[i], key, where);
      for (std::size_t k = 0; k < ls.size(); ++k) {
        std::string lw = where + "." + key + "[" + std::to_string(k) + "]";
        MapLane l;
        l.lane_id = detail::get<int>(ls[k], "lane_id", lw);
        l.left = detail::polyline(detail::req(ls[k], "left", lw), lw + ".left");
        l.right = detail::polyline(detail::req(ls[k], "right", lw), lw + ".right");
        if (ls[k].contains("movements")) {
          for (const auto& mv : ls[k].at("movements")) l.movements.push_back(parse_decision(mv.get<std::string>()));
        }
        (std::string_view(key) == "entry_lanes" ? r.entry : r.exit).push_back(std::move(l));
      }
    }
    roads.push_back(std::move(r));
  }
  std::vector<Crosswalk> cws;
  if (j.contains("crosswalks")) {
    for (const auto& c : j.at("crosswalks")) {
      Crosswalk cw;
      cw.id = detail::get<int>(c, "id", "crosswalks");
      cw.poly.pts = detail::polyline(detail::req(c, "polygon", "crosswalks"), "crosswalks.polygon");
      cws.push_back(std::move(cw));
    }
  }
  try {
    return IntersectionMap(std::move(roads), std::move(cws), w);
  } catch (const GeometryError& e) {
    throw InputError(std::string("map geometry: ") + e.what());
  }
}

using AnyMap = std::variant<HighwayMap, IntersectionMap>;

inline AnyMap parse_map(std::string_view text) {
  Json j = detail::parse_json(text);
  std::string type = detail::get<std::string>(j, "type", "map");
  if (type == "highway") return parse_highway_map(j);
  if (type == "intersection") return parse_intersection_map(j);
  throw InputError("map: type must be 'highway' or 'intersection'");
}

inline AnyMap load_map(const std::string& path) {
  try {
    return parse_map(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.position(), path + ": " + e.detail());
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

namespace detail {

inline Json points_json(const Polyline& p) {
  Json a = Json::array();
  for (auto v : p) a.push_back({v.x, v.y});
  return a;
}

}  // namespace detail

inline Json to_json(const HighwayMap& m) {
  Json lines = Json::array(), lanes = Json::array(), signs = Json::array();
  for (const auto& l : m.lines) {
    lines.push_back({{"id", l.id},
                     {"type", l.type == LineType::Solid ? "solid" : "dashed"},
                     {"points", detail::points_json(l.points)}});
  }
  for (std::size_t i = 0; i < m.lane_types.size(); ++i) {
    lanes.push_back({{"id", i + 1}, {"road_type", to_string(m.lane_types[i])}});
  }
  for (const auto& z : m.signs) {
    signs.push_back({{"from", z.from}, {"to", z.to}, {"v_min_kmh", z.v_min_kmh}, {"v_max_kmh", z.v_max_kmh}});
  }
  return Json{{"type", "highway"},
              {"lane_lines", lines},
              {"lanes", lanes},
              {"n_mainway_lanes", m.n_mainway},
              {"speed_signs", signs}};
}

inline Json to_json(const IntersectionMap& m) {
  Json roads = Json::array(), cws = Json::array();
  auto lanes = [](const std::vector<MapLane>& ls) {
    Json a = Json::array();
    for (const auto& l : ls) {
      Json mv = Json::array();
      for (auto d : l.movements) mv.push_back(to_string(d));
      a.push_back({{"lane_id", l.lane_id},
                   {"left", detail::points_json(l.left)},
                   {"right", detail::points_json(l.right)},
                   {"movements", mv}});
    }
    return a;
  };
  for (const auto& r : m.roads()) {
    roads.push_back({{"road_id", r.road_id},
                     {"light_channel", r.light_channel},
                     {"stop_line", detail::points_json({r.stop_line.a, r.stop_line.b})},
                     {"entry_lanes", lanes(r.entry)},
                     {"exit_lanes", lanes(r.exit)}});
  }
  for (const auto& c : m.crosswalks()) cws.push_back({{"id", c.id}, {"polygon", detail::points_json(c.poly.pts)}});
  return Json{{"type", "intersection"}, {"lane_width", m.lane_width()}, {"roads", roads}, {"crosswalks", cws}};
}

/// Canonical-schema CSV for a recording.
inline std::string to_csv(const Recording& rec) {
  std::string out = "id,frame,time,class,x,y,vx,vy,ax,ay,heading,length,width,decision\n";
  auto num = [](double v) { return format_double(v); };
  for (const auto& f : rec.frames) {
    for (const auto& a : f.actors) {
      const char* cls = a.cls == ActorClass::Pedestrian ? "pedestrian" : a.cls == ActorClass::Truck ? "truck" : "car";
      out += std::to_string(a.id) + "," + std::to_string(f.frame) + "," + num(f.t) + "," + cls + "," + num(a.x) +
             "," + num(a.y) + "," + num(a.vx) + "," + num(a.vy) + "," + num(a.ax) + "," + num(a.ay) + "," +
             num(a.heading) + "," + num(a.length) + "," + num(a.width) + "," +
             (a.decision ? to_string(*a.decision) : "") + "\n";
    }
  }
  return out;
}

inline std::string lights_to_csv(const std::vector<LightSample>& lights) {
  std::string out = "time,channel,state\n";
  for (const auto& l : lights) out += format_double(l.t) + "," + l.channel + "," + to_string(l.state) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Replay

/// Least-squares cubic y(x) through points in the ego frame, valid over their
/// x range. Falls back to lower degree when there are too few points. Abscissae
/// are scaled to [-1, 1] before forming the normal equations.
inline Cubic fit_cubic(const std::vector<Vec2>& pts) {
  if (pts.size() < 2) throw GeometryError("need at least two points for a lane-line fit");
  double lo = pts.front().x, hi = pts.front().x;
  for (auto p : pts) {
    lo = std::min(lo, p.x);
    hi = std::max(hi, p.x);
  }
  const int degree = static_cast<int>(std::min<std::size_t>(3, pts.size() - 1));
  const double s = std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  // Normal equations from power sums: ata(i, j) = sum u^(i + j).
  double mom[7] = {0, 0, 0, 0, 0, 0, 0};
  Eigen::Vector4d aty = Eigen::Vector4d::Zero();
  for (auto p : pts) {
    double u = p.x / s, w = 1;
    for (int k = 0; k < 7; ++k) {
      mom[k] += w;
      if (k < 4) aty(k) += w * p.y;
      w *= u;
    }
  }
  Eigen::Matrix4d ata;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) ata(i, j) = mom[i + j];
  }
  const int m = degree + 1;
  Eigen::Vector4d c = Eigen::Vector4d::Zero();
  c.head(m) = ata.topLeftCorner(m, m).ldlt().solve(aty.head(m));
  return Cubic{c(0), c(1) / s, c(2) / (s * s), c(3) / (s * s * s), lo, hi};
}

namespace detail {

/// Index of the polyline vertex nearest p, searching outward from a hint.
inline std::size_t nearest_vertex(const Polyline& line, Vec2 p, std::optional<std::size_t> hint) {
  auto d2 = [&](std::size_t i) {
    Vec2 d = line[i] - p;
    return dot(d, d);
  };
  if (!hint) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < line.size(); ++i) {
      if (d2(i) < d2(best)) best = i;
    }
    return best;
  }
  std::size_t i = std::min(*hint, line.size() - 1);
  while (i + 1 < line.size() && d2(i + 1) < d2(i)) ++i;
  while (i > 0 && d2(i - 1) < d2(i)) --i;
  return i;
}

/// Road direction at the foot of p near vertex i: vertex tangents by central
/// differences, interpolated along the segment holding the foot point.
inline Vec2 tangent_near(const Polyline& line, std::size_t i, Vec2 p) {
  auto vertex_tangent = [&](std::size_t k) {
    std::size_t a = k > 0 ? k - 1 : 0, b = std::min(k + 1, line.size() - 1);
    return line[b] - line[a];
  };
  std::size_t j = i;
  double u = 0;
  double best = kInfinity;
  for (std::size_t k = i > 0 ? i - 1 : 0; k <= i && k + 1 < line.size(); ++k) {
    Vec2 d = line[k + 1] - line[k];
    double w = std::clamp(dot(p - line[k], d) / dot(d, d), 0.0, 1.0);
    double dist = norm(line[k] + d * w - p);
    if (dist < best) {
      best = dist;
      j = k;
      u = w;
    }
  }
  if (j + 1 >= line.size()) return vertex_tangent(j);
  return vertex_tangent(j) * (1 - u) + vertex_tangent(j + 1) * u;
}

}  // namespace detail

/// Per-ego highway replay: road-aligned ego frame at every recorded frame
/// containing the ego.
class HighwayReplay {
 public:
  HighwayReplay(const Recording& rec, ActorId ego, const HighwayMap& map, const ThresholdConfig& cfg,
                double fit_range = 100.0)
      : rec_(&rec), ego_(ego), map_(&map), cfg_(cfg), inference_(cfg), fit_range_(fit_range) {
    for (std::size_t i = 0; i < rec.frames.size(); ++i) {
      if (Recording::find(rec.frames[i], ego)) idx_.push_back(i);
    }
    if (idx_.empty()) throw InputError("ego " + std::to_string(ego) + " is not in the recording");
    hints_.assign(map.lines.size(), std::nullopt);
  }

  std::size_t size() const { return idx_.size(); }

  /// Builds frame k of the ego's lifespan. Frames must be requested in order
  /// for decision inference to see a continuous history.
  SceneFrame frame(std::size_t k) {
    const RecordedFrame& rf = rec_->frames[idx_[k]];
    const ActorSample& eg = *Recording::find(rf, ego_);
    SceneFrame f;
    f.timestamp = rf.t;
    Vec2 c{eg.x, eg.y};

    // Road tangent from line 1 near the ego.
    const auto& ref = map_->lines.front().points;
    std::size_t vi = detail::nearest_vertex(ref, c, hints_[0]);
    hints_[0] = vi;
    Vec2 tan = detail::tangent_near(ref, vi, c);
    Pose pose{eg.x, eg.y, std::atan2(tan.y, tan.x)};
    f.frame_origin = pose;
    f.ego = to_local(vehicle_state(eg), pose);
    f.targets.reserve(rf.actors.size());
    for (const auto& a : rf.actors) {
      if (a.id == ego_ || a.cls == ActorClass::Pedestrian) continue;
      f.targets.push_back(to_local(vehicle_state(a), pose));
    }

    // Lane lines fitted in the ego frame.
    const double cs = std::cos(pose.heading), sn = std::sin(pose.heading);
    std::vector<Cubic> fits;
    fits.reserve(map_->lines.size());
    std::vector<Vec2>& local = scratch_;
    for (std::size_t li = 0; li < map_->lines.size(); ++li) {
      const auto& pts = map_->lines[li].points;
      std::size_t ni = detail::nearest_vertex(pts, c, hints_[li]);
      hints_[li] = ni;
      std::size_t span = static_cast<std::size_t>(fit_range_ / 4.0) + 2;
      std::size_t a = ni > span ? ni - span : 0, b = std::min(pts.size() - 1, ni + span);
      local.clear();
      for (std::size_t i = a; i <= b; ++i) {
        double dx = pts[i].x - pose.x, dy = pts[i].y - pose.y;
        Vec2 q{cs * dx + sn * dy, -sn * dx + cs * dy};
        if (std::abs(q.x) <= fit_range_) local.push_back(q);
      }
      if (local.size() < 2) {
        fits.clear();
        break;
      }
      fits.push_back(fit_cubic(local));
    }
    if (!fits.empty()) {
      for (std::size_t i = 0; i + 1 < fits.size(); ++i) {
        LaneGeometry lg;
        lg.lane_id = static_cast<int>(i) + 1;
        lg.left = fits[i];
        lg.right = fits[i + 1];
        lg.left_type = map_->lines[i].type;
        lg.right_type = map_->lines[i + 1].type;
        f.lanes.push_back(lg);
      }
    }
    f.n_mainway_lanes = map_->n_mainway;
    auto lane = lane_of(f.ego, f.lanes);
    f.road_type = lane ? map_->lane_types[static_cast<std::size_t>(*lane - 1)] : RoadType::Mainway;

    double station = map_->reference.project_near(c, vi);
    for (const auto& z : map_->signs) {
      if (station >= z.from && station <= z.to) f.speed_sign = SpeedSignContext{z.v_min_kmh, z.v_max_kmh, true};
    }
    f.regions = partition_regions(f);
    if (eg.decision && is_highway_decision(*eg.decision)) {
      if (!last_decision_ || last_decision_->kind != *eg.decision) last_decision_ = Decision{*eg.decision, rf.t};
      f.decision = *last_decision_;
    } else {
      f.decision = inference_.update(f);
    }
    return f;
  }

  static VehicleState vehicle_state(const ActorSample& a) {
    VehicleState v;
    v.id = a.id;
    v.cls = a.cls;
    v.x = a.x;
    v.y = a.y;
    v.vx = a.vx;
    v.vy = a.vy;
    v.ax = a.ax;
    v.ay = a.ay;
    v.heading = a.heading;
    v.length = a.length;
    v.width = a.width;
    return v;
  }

 private:
  const Recording* rec_;
  ActorId ego_;
  const HighwayMap* map_;
  ThresholdConfig cfg_;
  HighwayDecisionInference inference_;
  double fit_range_;
  std::vector<std::size_t> idx_;
  std::vector<std::optional<std::size_t>> hints_;
  std::optional<Decision> last_decision_;
  std::vector<Vec2> scratch_;
};

inline std::vector<SceneFrame> replay_highway(const Recording& rec, ActorId ego, const HighwayMap& map,
                                              const ThresholdConfig& cfg) {
  HighwayReplay r(rec, ego, map, cfg);
  std::vector<SceneFrame> out;
  out.reserve(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) out.push_back(r.frame(k));
  return out;
}

/// Intersection replay keeps map coordinates. The movement comes from the
/// decision column when present, otherwise from the first entry road and the
/// last exit road the ego centre was seen on. The light is the ego's entry
/// road channel.
inline std::vector<SceneFrame> replay_intersection(const Recording& rec, ActorId ego, const IntersectionMap& map) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < rec.frames.size(); ++i) {
    if (Recording::find(rec.frames[i], ego)) idx.push_back(i);
  }
  if (idx.empty()) throw InputError("ego " + std::to_string(ego) + " is not in the recording");
  std::optional<int> road_in, road_out;
  for (auto i : idx) {
    const ActorSample& a = *Recording::find(rec.frames[i], ego);
    if (!road_in) {
      if (auto l = map.entry_lane_at({a.x, a.y})) road_in = l->first;
    }
    if (auto l = map.exit_lane_at({a.x, a.y})) road_out = l->first;
  }
  std::optional<DecisionKind> inferred;
  if (road_in && road_out) inferred = infer_intersection_decision(*road_in, *road_out);
  std::optional<std::string> channel;
  if (road_in) channel = map.road(*road_in).light_channel;

  std::vector<SceneFrame> out;
  out.reserve(idx.size());
  std::optional<Decision> last;
  for (auto i : idx) {
    const RecordedFrame& rf = rec.frames[i];
    const ActorSample& eg = *Recording::find(rf, ego);
    SceneFrame f;
    f.timestamp = rf.t;
    f.road_type = RoadType::Intersection;
    f.ego = HighwayReplay::vehicle_state(eg);
    for (const auto& a : rf.actors) {
      if (a.id == ego) continue;
      if (a.cls == ActorClass::Pedestrian) {
        f.pedestrians.push_back({a.id, {a.x, a.y}, {a.vx, a.vy}, a.heading});
      } else {
        f.targets.push_back(HighwayReplay::vehicle_state(a));
      }
    }
    if (channel) f.traffic_light = rec.light_at(*channel, rf.t);
    DecisionKind k = eg.decision && !is_highway_decision(*eg.decision) ? *eg.decision
                     : inferred                                           ? *inferred
                                                                          : DecisionKind::KeepLane;
    if (!last || last->kind != k) last = Decision{k, rf.t};
    f.decision = *last;
    out.push_back(std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Event logs

struct LogMeta {
  std::string scenario;  // highway or intersection
  std::string fragment_id;
  double start_s = 0;
  double end_s = 0;
  std::size_t egos = 0;
  friend bool operator==(const LogMeta&, const LogMeta&) = default;
};

struct EventLog {
  LogMeta meta;
  std::vector<ViolationEvent> events;
  std::vector<Diagnostic> diagnostics;
};

inline Json number_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double json_number(const Json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "inf") return kInfinity;
    if (s == "-inf") return -kInfinity;
    if (s == "nan") return std::nan("");
  }
  throw InputError(where + ": expected a number");
}

inline Json to_json(const ViolationEvent& e) {
  Json ev = Json::object();
  for (const auto& [k, v] : e.evidence) ev[k] = number_json(v);
  return Json{{"kind", e.kind == EventKind::Violation ? "violation" : "advisory"},
              {"article", e.article},
              {"sub_rule", e.sub_rule},
              {"ego_id", e.ego_id},
              {"start", e.start},
              {"end", e.end},
              {"evidence", ev}};
}

inline ViolationEvent event_from_json(const Json& j, const std::string& where) {
  ViolationEvent e;
  std::string kind = detail::get<std::string>(j, "kind", where);
  if (kind != "violation" && kind != "advisory") throw InputError(where + ": kind must be violation or advisory");
  e.kind = kind == "violation" ? EventKind::Violation : EventKind::Advisory;
  e.article = detail::get<std::string>(j, "article", where);
  e.sub_rule = detail::get<std::string>(j, "sub_rule", where);
  e.ego_id = detail::get<ActorId>(j, "ego_id", where);
  e.start = detail::get<double>(j, "start", where);
  e.end = detail::get<double>(j, "end", where);
  if (j.contains("evidence")) {
    for (const auto& [k, v] : j.at("evidence").items()) e.evidence[k] = json_number(v, where + ".evidence." + k);
  }
  if (!in_catalogue(e.article, e.sub_rule, e.kind)) {
    throw InputError(where + ": " + e.article + "/" + e.sub_rule + " is not a catalogued rule");
  }
  return e;
}

inline Json to_json(const EventLog& log) {
  Json events = Json::array(), diags = Json::array();
  for (const auto& e : log.events) events.push_back(to_json(e));
  for (const auto& d : log.diagnostics) {
    diags.push_back({{"ego_id", d.ego_id}, {"time", d.time}, {"code", d.code}, {"message", d.message}});
  }
  return Json{{"metadata",
               {{"scenario", log.meta.scenario},
                {"fragment_id", log.meta.fragment_id},
                {"start_s", log.meta.start_s},
                {"end_s", log.meta.end_s},
                {"egos", log.meta.egos}}},
              {"events", events},
              {"diagnostics", diags}};
}

inline EventLog parse_event_log(std::string_view text) {
  Json j = detail::parse_json(text);
  EventLog log;
  if (j.contains("metadata")) {
    const Json& m = j.at("metadata");
    log.meta.scenario = m.value("scenario", "");
    log.meta.fragment_id = m.value("fragment_id", "");
    log.meta.start_s = m.value("start_s", 0.0);
    log.meta.end_s = m.value("end_s", 0.0);
    log.meta.egos = m.value("egos", std::size_t{0});
  }
  const Json& ev = detail::req(j, "events", "event log");
  if (!ev.is_array()) throw InputError("event log: 'events' must be a list");
  for (std::size_t i = 0; i < ev.size(); ++i) log.events.push_back(event_from_json(ev[i], "events[" + std::to_string(i) + "]"));
  if (j.contains("diagnostics")) {
    for (const auto& d : j.at("diagnostics")) {
      log.diagnostics.push_back({d.at("ego_id").get<ActorId>(), d.at("time").get<double>(),
                                 d.at("code").get<std::string>(), d.at("message").get<std::string>()});
    }
  }
  return log;
}

}  // namespace lawmon
