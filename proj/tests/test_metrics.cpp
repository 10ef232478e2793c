// Copyright 2026 The dualdemo Authors
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

#include <cmath>
#include <numbers>

#include "dualdemo/error.hpp"
#include "dualdemo/metrics.hpp"
#include "dualdemo/random.hpp"
#include "oracles.hpp"

namespace dualdemo {
namespace {

Trajectory circle(double r, std::size_t T) {
  Points p(static_cast<Eigen::Index>(T), 2);
  for (std::size_t i = 0; i < T; ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(T - 1);
    p(static_cast<Eigen::Index>(i), 0) = r * std::cos(a);
    p(static_cast<Eigen::Index>(i), 1) = r * std::sin(a);
  }
  return Trajectory(p);
}

TEST(Sse, Examples) {
  Rng rng(1);
  const Trajectory a(oracle::random_points(rng, 10, 2));
  EXPECT_EQ(sse(a, a), 0.0);
  EXPECT_DOUBLE_EQ(sse(Trajectory::from_rows({{0}, {0}}), Trajectory::from_rows({{1}, {2}})), 5.0);
  EXPECT_THROW(sse(a, Trajectory(oracle::random_points(rng, 11, 2))), Error);
}

TEST(Sea, Examples) {
  Rng rng(2);
  const Trajectory a(oracle::random_points(rng, 10, 2));
  EXPECT_EQ(sea(a, a), 0.0);
  const auto lo = Trajectory::from_rows({{0, 0}, {1, 0}}), hi = Trajectory::from_rows({{0, 1}, {1, 1}});
  EXPECT_DOUBLE_EQ(sea(lo, hi), 1.0);
  EXPECT_THROW(sea(Trajectory::from_rows({{0}, {1}}), Trajectory::from_rows({{1}, {2}})), Error);
}

TEST(Sea, ShoelaceOracleOnSimpleCells) {
  Rng rng(3);
  // a below b with x strictly increasing: every cell is a convex quadrilateral.
  for (int trial = 0; trial < 20; ++trial) {
    Points a(20, 2), b(20, 2);
    double x = 0.0;
    for (Eigen::Index t = 0; t < 20; ++t) {
      x += rng.uniform(0.05, 0.2);
      a(t, 0) = b(t, 0) = x;
      a(t, 1) = rng.uniform(-1.0, 0.0);
      b(t, 1) = rng.uniform(0.1, 1.0);
    }
    double ref = 0.0;
    for (Eigen::Index t = 0; t + 1 < 20; ++t)
      ref += oracle::shoelace({{a(t, 0), a(t, 1)}, {a(t + 1, 0), a(t + 1, 1)}, {b(t + 1, 0), b(t + 1, 1)}, {b(t, 0), b(t, 1)}});
    EXPECT_NEAR(sea(Trajectory(a), Trajectory(b)), ref, 1e-9);
  }
}

TEST(Metrics, MatchBruteForceOraclesOnRandomPairs) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = trial % 2 == 0 ? 2 : 3;
    const auto T = static_cast<Eigen::Index>(3 + rng.index(40));
    const Points a = oracle::random_points(rng, T, n), b = oracle::random_points(rng, T, n);
    const auto m = compare(Trajectory(a), Trajectory(b));
    EXPECT_NEAR(m.sse, oracle::sse(a, b), 1e-9);
    EXPECT_NEAR(m.sea, oracle::sea(a, b), 1e-9);
    EXPECT_NEAR(m.crv, oracle::crv(a, b), 1e-9 * std::max(1.0, m.crv));
  }
}

TEST(Crv, Examples) {
  Rng rng(5);
  const Trajectory a(oracle::random_points(rng, 10, 2));
  EXPECT_EQ(crv(a, a), 0.0);
  Points l1(10, 2), l2(10, 2);
  for (Eigen::Index i = 0; i < 10; ++i) {
    l1.row(i) << i, 0.5 * i;
    l2.row(i) << i, -3.0 * i + 1.0;
  }
  EXPECT_EQ(crv(Trajectory(l1), Trajectory(l2)), 0.0);
  EXPECT_THROW(crv(Trajectory::from_rows({{0, 0}, {1, 1}}), Trajectory::from_rows({{0, 0}, {1, 1}})), Error);
}

TEST(Crv, CirclesOfRadiusOneAndTwo) {
  const double value = crv(circle(2.0, 50), circle(1.0, 50));
  EXPECT_NEAR(value, 12.5, 0.05 * 12.5);
  for (double k : menger_curvature(circle(2.0, 50))) EXPECT_NEAR(k, 0.5, 0.01);
}

TEST(Metrics, SymmetryAndInvariances) {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const Trajectory a(oracle::random_points(rng, 25, 2)), b(oracle::random_points(rng, 25, 2));
    const auto ab = compare(a, b), ba = compare(b, a);
    EXPECT_EQ(ab.sse, ba.sse);
    EXPECT_EQ(ab.sea, ba.sea);
    EXPECT_EQ(ab.crv, ba.crv);
    EXPECT_GE(ab.sse, 0.0);
    EXPECT_GE(ab.sea, 0.0);
    EXPECT_GE(ab.crv, 0.0);

    const Eigen::RowVector2d shift(rng.normal(0.0, 5.0), rng.normal(0.0, 5.0));
    Points as = a.points(), bs = b.points();
    as.rowwise() += shift;
    bs.rowwise() += shift;
    const auto moved = compare(Trajectory(as), Trajectory(bs));
    EXPECT_NEAR(moved.sse, ab.sse, 1e-9 * std::max(1.0, ab.sse));
    EXPECT_NEAR(moved.sea, ab.sea, 1e-9 * std::max(1.0, ab.sea));
    EXPECT_NEAR(moved.crv, ab.crv, 1e-9 * std::max(1.0, ab.crv));

    const double th = rng.uniform(0.0, 2.0 * std::numbers::pi);
    Eigen::Matrix2d rot;
    rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    const Points ar = a.points() * rot.transpose(), br = b.points() * rot.transpose();
    EXPECT_NEAR(crv(Trajectory(ar), Trajectory(br)), ab.crv, 1e-9 * std::max(1.0, ab.crv));
  }
}

}  // namespace
}  // namespace dualdemo
