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

#include <gtest/gtest.h>

#include <optional>
#include <random>

#include "lawmon/geometry.hpp"

namespace {

using namespace lawmon;

// Dense oracle: walk the line at 1 mm and test point membership. A case is
// kept only when the verdict is the same for the box shrunk and grown by 2 mm,
// so sampling cannot miss a thin touch.
bool dense_overlap(const OrientedBox& b, const Polyline& line) {
  for (std::size_t i = 1; i < line.size(); ++i) {
    Vec2 a = line[i - 1], c = line[i];
    double len = norm(c - a);
    int n = std::max(1, static_cast<int>(len / 0.001));
    for (int k = 0; k <= n; ++k) {
      if (contains(b, a + (c - a) * (static_cast<double>(k) / n))) return true;
    }
  }
  return false;
}

std::optional<bool> robust_truth(const OrientedBox& b, const Polyline& line) {
  bool inner = dense_overlap(b.inflated(-0.002), line);
  bool outer = dense_overlap(b.inflated(0.002), line);
  if (inner != outer) return std::nullopt;
  return inner;
}

TEST(Geometry, SquaresThreeMetresApartDoNotOverlap) {
  OrientedBox a{{0, 0}, 0, 1, 1}, b{{3, 0}, 0, 1, 1};
  EXPECT_FALSE(overlap(a, b));
}

TEST(Geometry, VehicleStraddlingLaneLine) {
  OrientedBox car{{0, 0.5}, 0, 4.5, 2};
  EXPECT_TRUE(overlap(car, Segment{{-50, 0}, {50, 0}}));
  EXPECT_TRUE(overlap(car, Cubic{}));
  OrientedBox clear{{0, 1.01}, 0, 4.5, 2};
  EXPECT_FALSE(overlap(clear, Cubic{}));
}

TEST(Geometry, DegenerateRectangleRejected) {
  OrientedBox flat{{0, 0}, 0, 4, 0};
  EXPECT_THROW(overlap(flat, Segment{{0, 0}, {1, 1}}), GeometryError);
  EXPECT_THROW(overlap(flat, Cubic{}), GeometryError);
}

TEST(Geometry, BoxPolylineMatchesDenseOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-6, 6), ang(-kPi, kPi), dim(0.5, 5);
  int checked = 0;
  for (int trial = 0; trial < 600; ++trial) {
    OrientedBox b{{pos(rng), pos(rng)}, ang(rng), dim(rng), dim(rng)};
    Polyline line;
    for (int k = 0; k < 3; ++k) line.push_back({pos(rng), pos(rng)});
    auto truth = robust_truth(b, line);
    if (!truth) continue;
    EXPECT_EQ(overlap(b, line), *truth) << "trial " << trial;
    ++checked;
  }
  EXPECT_GT(checked, 500);
}

TEST(Geometry, BoxCubicMatchesDenseOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(-4, 4), ang(-0.4, 0.4), coef(-0.02, 0.02);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    OrientedBox b{{pos(rng) * 5, pos(rng)}, ang(rng), 4.5, 1.8};
    Cubic c{pos(rng) / 2, coef(rng) * 5, coef(rng), coef(rng) / 20, -30, 30};
    Polyline line;
    for (double x = -30; x <= 30; x += 0.05) line.push_back({x, c(x)});
    auto truth = robust_truth(b, line);
    if (!truth) continue;
    EXPECT_EQ(overlap(b, c), *truth) << "trial " << trial;
    ++checked;
  }
  EXPECT_GT(checked, 250);
}

TEST(Geometry, RectangleOverlapSymmetricAndMonotoneUnderInflation) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(-5, 5), ang(-kPi, kPi), dim(0.2, 4), grow(0, 1);
  for (int trial = 0; trial < 2000; ++trial) {
    OrientedBox a{{pos(rng), pos(rng)}, ang(rng), dim(rng), dim(rng)};
    OrientedBox b{{pos(rng), pos(rng)}, ang(rng), dim(rng), dim(rng)};
    bool ab = overlap(a, b);
    EXPECT_EQ(ab, overlap(b, a));
    if (ab) EXPECT_TRUE(overlap(a.inflated(grow(rng)), b));
  }
}

TEST(Geometry, PolygonContainmentIncludesBoundary) {
  Polygon sq{{{0, 0}, {2, 0}, {2, 2}, {0, 2}}};
  EXPECT_TRUE(contains(sq, {1, 1}));
  EXPECT_TRUE(contains(sq, {2, 1}));
  EXPECT_TRUE(contains(sq, {0, 0}));
  EXPECT_FALSE(contains(sq, {2.1, 1}));
  EXPECT_DOUBLE_EQ(signed_area(sq), 4.0);
}

TEST(Geometry, HalfPlaneClip) {
  Polygon sq{{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}};
  Polygon upper = clip_left(sq, {0, 0}, {1, 0});
  EXPECT_NEAR(signed_area(upper), 2.0, 1e-12);
  EXPECT_FALSE(contains(upper, {0, -0.5}));
  EXPECT_TRUE(contains(upper, {0, 0.5}));
}

TEST(Geometry, CubicOutsideValidityRangeIgnored) {
  Cubic c{0, 0, 0, 0, 10, 20};
  EXPECT_FALSE(overlap(OrientedBox{{0, 0}, 0, 4, 2}, c));
  EXPECT_TRUE(overlap(OrientedBox{{10.5, 0}, 0, 4, 2}, c));
}

}  // namespace
