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

// Writes the synthetic sample recordings and maps under samples/.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "lawmon/synthetic.hpp"

namespace fs = std::filesystem;
using namespace lawmon;

int main(int argc, char** argv) {
  CLI::App app{"Generate synthetic sample data", "make_samples"};
  std::string dir = "samples";
  app.add_option("dir", dir, "Output directory");
  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(fs::path(dir) / "highway");
    fs::create_directories(fs::path(dir) / "intersection");
    auto hw = fs::path(dir) / "highway";
    write_file((hw / "hw3.json").string(), synthetic::straight_highway_json(3).dump(2) + "\n");
    write_file((hw / "fig9.csv").string(), to_csv(synthetic::fig9_recording()));

    // Two lane-1 cars below the lane minimum and one within the band.
    using synthetic::cruiser;
    using synthetic::lane_center;
    auto speeders = synthetic::record({cruiser(1, 0, lane_center(1), kmh_to_mps(95)),
                                       cruiser(2, 500, lane_center(1), kmh_to_mps(125)),
                                       cruiser(3, 0, lane_center(2), kmh_to_mps(100))},
                                      8.0, 25.0);
    write_file((hw / "speeders.csv").string(), to_csv(speeders));

    auto ix = fs::path(dir) / "intersection";
    auto map = synthetic::symmetric_junction();
    write_file((ix / "junction.json").string(), to_json(map).dump(2) + "\n");
    for (const auto& sc : synthetic::fig10_scenarios(map)) {
      if (sc.name != "left_turn_obstructs_straight" && sc.name != "straight_on_red") continue;
      write_file((ix / (sc.rec.fragment_id + ".csv")).string(), to_csv(sc.rec));
      write_file((ix / (sc.rec.fragment_id + "_lights.csv")).string(), lights_to_csv(sc.rec.lights));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
