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

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lawmon/calibration.hpp"
#include "lawmon/dataset_io.hpp"
#include "lawmon/highway_monitor.hpp"
#include "lawmon/intersection_monitor.hpp"
#include "lawmon/report.hpp"

namespace lawmon {

/// Parses `all` or a comma-separated id list.
inline std::vector<ActorId> select_egos(const Recording& rec, const std::string& spec) {
  auto all = rec.vehicle_ids();
  if (spec == "all") return all;
  std::vector<ActorId> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v;
    if (!parse_double(item, v) || v < 0 || v != std::floor(v)) throw InputError("bad ego id '" + item + "'");
    auto id = static_cast<ActorId>(v);
    if (!std::binary_search(all.begin(), all.end(), id)) {
      throw InputError("ego " + item + " is not a vehicle in the recording");
    }
    out.push_back(id);
  }
  if (out.empty()) throw InputError("no ego selected");
  return out;
}

inline LogMeta recording_meta(const Recording& rec, std::string scenario, std::size_t egos) {
  LogMeta m;
  m.scenario = std::move(scenario);
  m.fragment_id = std::filesystem::path(rec.fragment_id).stem().string();
  if (!rec.frames.empty()) {
    m.start_s = rec.frames.front().t;
    m.end_s = rec.frames.back().t;
  }
  m.egos = egos;
  return m;
}

/// Every selected ego monitored over its own lifespan; the merged log is
/// ordered by (ego, start). An ego whose monitor throws MonitorError is
/// reported as a `monitor_error` diagnostic with no events.
inline EventLog monitor_highway(const Recording& rec, const HighwayMap& map, const ThresholdConfig& cfg,
                                const std::vector<ActorId>& egos, const std::vector<Rule>& rules = {}) {
  EventLog log;
  log.meta = recording_meta(rec, "highway", egos.size());
  const double dt = 1.0 / rec.rate_hz;
  for (ActorId id : egos) {
    HighwayReplay replay(rec, id, map, cfg);
    HighwayMonitor mon(id, cfg, dt, rules.empty() ? default_highway_rules() : rules);
    double t = 0;
    try {
      for (std::size_t k = 0; k < replay.size(); ++k) {
        auto f = replay.frame(k);
        t = f.timestamp;
        mon.step(f);
      }
      mon.finish();
    } catch (const MonitorError& e) {
      log.diagnostics.insert(log.diagnostics.end(), mon.diagnostics().begin(), mon.diagnostics().end());
      log.diagnostics.push_back({id, t, "monitor_error", e.what()});
      continue;
    }
    auto ev = mon.events();
    log.events.insert(log.events.end(), ev.begin(), ev.end());
    log.diagnostics.insert(log.diagnostics.end(), mon.diagnostics().begin(), mon.diagnostics().end());
  }
  std::stable_sort(log.events.begin(), log.events.end(), event_less);
  return log;
}

/// An ego whose monitor stops on a MonitorError (such as a missing light)
/// contributes a `monitor_error` diagnostic and no events.
inline EventLog monitor_intersection(const Recording& rec, const IntersectionMap& map, const ThresholdConfig& cfg,
                                     const std::vector<ActorId>& egos, const std::vector<Rule>& rules = {}) {
  EventLog log;
  log.meta = recording_meta(rec, "intersection", egos.size());
  const double dt = 1.0 / rec.rate_hz;
  for (ActorId id : egos) {
    auto frames = replay_intersection(rec, id, map);
    IntersectionMonitor mon(id, map, cfg, dt, rules);
    try {
      for (const auto& f : frames) mon.step(f);
      mon.finish();
    } catch (const MonitorError& e) {
      log.diagnostics.insert(log.diagnostics.end(), mon.diagnostics().begin(), mon.diagnostics().end());
      log.diagnostics.push_back({id, mon.last_sample().timestamp, "monitor_error", e.what()});
      continue;
    }
    auto ev = mon.events();
    log.events.insert(log.events.end(), ev.begin(), ev.end());
    log.diagnostics.insert(log.diagnostics.end(), mon.diagnostics().begin(), mon.diagnostics().end());
  }
  std::stable_sort(log.events.begin(), log.events.end(), event_less);
  return log;
}

namespace detail {

inline void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty() || out_path == "-") {
    out << text;
  } else {
    write_file(out_path, text);
  }
}

inline TrajectorySchema cli_schema(const std::string& name, double rate) {
  auto s = schema_by_name(name);
  if (rate > 0) s.rate_hz = rate;
  return s;
}

inline std::string rules_text_or_empty(const std::string& path) { return path.empty() ? "" : read_file(path); }

inline mtl::AtomRegistry all_atoms() {
  mtl::AtomRegistry r;
  for (const auto* reg : {&highway_atoms(), &intersection_atoms()}) {
    for (std::size_t i = 0; i < reg->size(); ++i) r.add(reg->name(i));
  }
  return r;
}

}  // namespace detail

/// Entry point of the `lawmon` tool. Exit status: 0 success, 1 violations
/// found with --fail-on-violation, 2 usage or input errors.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Online traffic-law violation monitor", "lawmon"};
  app.require_subcommand(1);

  std::string traj, map_path, config_path, ego = "all", out_path, schema = "canonical", rules_path, lights_path;
  double rate = 0;
  bool fail_on_violation = false;

  auto add_common = [&](CLI::App* sc) {
    sc->add_option("trajectories", traj, "Trajectory CSV")->required();
    sc->add_option("map", map_path, "Map JSON")->required();
    sc->add_option("--config", config_path, "Threshold configuration file");
    sc->add_option("--schema", schema, "Trajectory column layout: canonical, ad4che or sind");
    sc->add_option("--rate", rate, "Frame rate in Hz for layouts without a time column");
  };
  auto* hw = app.add_subcommand("monitor-highway", "Monitor highway articles 44, 47, 78, 80 and 82.3");
  auto* in = app.add_subcommand("monitor-intersection", "Monitor intersection article 38");
  for (auto* sc : {hw, in}) {
    add_common(sc);
    sc->add_option("--ego", ego, "Ego id, comma-separated ids, or all");
    sc->add_option("--out", out_path, "Event log output (default stdout)");
    sc->add_option("--rules", rules_path, "Rule file replacing the built-in rules");
    sc->add_flag("--fail-on-violation", fail_on_violation, "Exit 1 when any violation is found");
  }
  in->add_option("--lights", lights_path, "Traffic-light timeline CSV");

  auto* cal = app.add_subcommand("calibrate", "Calibrate d_clmin, t_max_cl and TTCx from highway data");
  add_common(cal);
  std::string out_config, model = "inverse";
  cal->add_option("--out-config", out_config, "Write the calibrated configuration here");
  cal->add_option("--out", out_path, "Calibration report output (default stdout)");
  cal->add_option("--model", model, "Ratio curve: inverse or power")->check(CLI::IsMember({"inverse", "power"}));

  auto* rep = app.add_subcommand("report", "Bin an event log into a violation report");
  std::string events_path, format = "json";
  double bin = 0;
  rep->add_option("events", events_path, "Event log JSON")->required();
  rep->add_option("--bin", bin, "Bin width in seconds (default by scenario)");
  rep->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  rep->add_option("--out", out_path, "Output file (default stdout)");
  rep->add_option("--config", config_path, "Configuration supplying default bin widths");

  auto* chk = app.add_subcommand("check-formula", "Parse and validate a rule file");
  std::string formula_path, scenario = "auto";
  chk->add_option("file", formula_path, "Rule file")->required();
  chk->add_option("--scenario", scenario, "Atom set: highway, intersection or auto")
      ->check(CLI::IsMember({"highway", "intersection", "auto"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    ThresholdConfig cfg = config_path.empty() ? ThresholdConfig{} : load_config(config_path);
    if (hw->parsed() || in->parsed()) {
      auto rec = load_trajectories(traj, detail::cli_schema(schema, rate));
      auto map = load_map(map_path);
      auto egos = select_egos(rec, ego);
      std::string rules_text = detail::rules_text_or_empty(rules_path);
      EventLog log;
      if (hw->parsed()) {
        auto* m = std::get_if<HighwayMap>(&map);
        if (!m) throw InputError(map_path + ": not a highway map");
        auto rules = rules_text.empty() ? std::vector<Rule>{} : parse_rules(rules_text, highway_atoms());
        log = monitor_highway(rec, *m, cfg, egos, rules);
      } else {
        auto* m = std::get_if<IntersectionMap>(&map);
        if (!m) throw InputError(map_path + ": not an intersection map");
        if (!lights_path.empty()) rec.lights = parse_lights(read_file(lights_path));
        auto rules = rules_text.empty() ? std::vector<Rule>{} : parse_rules(rules_text, intersection_atoms());
        log = monitor_intersection(rec, *m, cfg, egos, rules);
      }
      detail::emit(to_json(log).dump(2) + "\n", out_path, out);
      bool any = std::any_of(log.events.begin(), log.events.end(),
                             [](const ViolationEvent& e) { return e.kind == EventKind::Violation; });
      return fail_on_violation && any ? 1 : 0;
    }
    if (cal->parsed()) {
      auto rec = load_trajectories(traj, detail::cli_schema(schema, rate));
      auto map = load_map(map_path);
      auto* m = std::get_if<HighwayMap>(&map);
      if (!m) throw InputError(map_path + ": calibration needs a highway map");
      auto r = calibrate(rec, *m, cfg, model == "power" ? RatioModel::Power : RatioModel::Inverse);
      if (!out_config.empty()) write_file(out_config, to_text(r.config));
      detail::emit(to_json(r).dump(2) + "\n", out_path, out);
      return 0;
    }
    if (rep->parsed()) {
      auto log = parse_event_log(read_file(events_path));
      double w = bin > 0 ? bin : log.meta.scenario == "intersection" ? cfg.intersection_bin_s : cfg.highway_bin_s;
      auto r = aggregate_events(log.events, w, log.meta);
      detail::emit(format == "csv" ? to_csv(r) : to_json(r).dump(2) + "\n", out_path, out);
      return 0;
    }
    if (chk->parsed()) {
      std::string text = read_file(formula_path);
      auto atoms = scenario == "highway"        ? highway_atoms()
                   : scenario == "intersection" ? intersection_atoms()
                                                : detail::all_atoms();
      auto rules = parse_rules(text, atoms);
      out << formula_path << ": " << rules.size() << " rules OK\n";
      return 0;
    }
  } catch (const ParseError& e) {
    if (chk->parsed() && e.line() > 0) {
      err << formula_path << ":" << e.line() << ":" << e.position() + 1 << ": error: " << e.detail() << "\n";
    } else {
      err << "error: " << e.what() << "\n";
    }
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace lawmon
