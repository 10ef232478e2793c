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

#include "dualdemo/error.hpp"
#include "dualdemo/random.hpp"
#include "dualdemo/trajectory.hpp"
#include "oracles.hpp"

namespace dualdemo {
namespace {

Trajectory line1d(std::initializer_list<double> xs) {
  std::vector<std::vector<double>> rows;
  for (double x : xs) rows.push_back({x});
  return Trajectory::from_rows(rows);
}

TEST(Trajectory, RejectsInvalidShapes) {
  EXPECT_THROW(Trajectory(Points(1, 2)), Error);
  EXPECT_THROW(Trajectory(Points(3, 0)), Error);
  Points p = Points::Zero(3, 2);
  p(1, 1) = std::nan("");
  EXPECT_THROW(Trajectory{p}, Error);
  EXPECT_THROW(Trajectory::from_rows({{0.0, 1.0}, {2.0}}), Error);
}

TEST(Trajectory, TimeStampsAreUniform) {
  const auto t = time_stamps(5);
  ASSERT_EQ(t.size(), 5u);
  EXPECT_DOUBLE_EQ(t[0], 0.0);
  EXPECT_DOUBLE_EQ(t[2], 0.5);
  EXPECT_DOUBLE_EQ(t[4], 1.0);
}

TEST(Resample, SegmentToFivePoints) {
  const auto r = resample(line1d({0.0, 1.0}), 5);
  ASSERT_EQ(r.length(), 5u);
  const double expect[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(r.points()(i, 0), expect[i]);
}

TEST(Resample, MatchedLengthIsIdentityAndIdempotent) {
  Rng rng(3);
  const Trajectory x(oracle::random_points(rng, 37, 3));
  EXPECT_EQ(resample(x, 37), x);
  const auto once = resample(x, 64);
  EXPECT_EQ(resample(once, 64), once);
}

TEST(Resample, MatchesParametricOracle) {
  const auto x = Trajectory::from_rows({{0, 0}, {1, 0}, {1, 1}});
  const auto r = resample(x, 5);
  EXPECT_EQ(r.point(0), x.point(0));
  EXPECT_EQ(r.point(4), x.point(2));
  for (int j = 0; j < 5; ++j) {
    const auto expect = oracle::polyline_at(x.points(), j / 4.0);
    EXPECT_NEAR((r.point(static_cast<std::size_t>(j)) - expect).norm(), 0.0, 1e-15) << "sample " << j;
  }
}

TEST(Resample, RandomAgainstOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto len = static_cast<Eigen::Index>(2 + rng.index(40));
    const std::size_t target = 2 + rng.index(150);
    const Trajectory x(oracle::random_points(rng, len, 2));
    const auto r = resample(x, target);
    EXPECT_EQ(r.point(0), x.point(0));
    EXPECT_EQ(r.point(target - 1), x.point(x.length() - 1));
    for (std::size_t j = 0; j < target; ++j) {
      const auto expect = oracle::polyline_at(x.points(), static_cast<double>(j) / static_cast<double>(target - 1));
      EXPECT_LT((r.point(j) - expect).norm(), 1e-12);
    }
  }
}

TEST(Resample, RejectsShortTarget) { EXPECT_THROW(resample(line1d({0, 1}), 1), Error); }

TEST(AlignSet, ResamplesEveryMemberAndKeepsLabels) {
  Rng rng(5);
  DemonstrationSet set;
  set.add({"a", Trajectory(oracle::random_points(rng, 50, 2)), Label::Successful});
  set.add({"b", Trajectory(oracle::random_points(rng, 120, 2)), Label::Failed});
  set.add({"c", Trajectory::from_rows({{0, 0}, {1, 2}}), Label::Successful});
  const auto aligned = align_set(set, 100);
  ASSERT_EQ(aligned.size(), 3u);
  for (const auto* d : {aligned.find("a"), aligned.find("b"), aligned.find("c")}) {
    ASSERT_NE(d, nullptr);
    EXPECT_EQ(d->trajectory.length(), 100u);
  }
  EXPECT_EQ(aligned.find("b")->label, Label::Failed);
  const auto& c = aligned.find("c")->trajectory;
  for (std::size_t i = 0; i < 100; ++i) {
    const double s = static_cast<double>(i) / 99.0;
    EXPECT_NEAR(c.points()(static_cast<Eigen::Index>(i), 0), s, 1e-14);
    EXPECT_NEAR(c.points()(static_cast<Eigen::Index>(i), 1), 2.0 * s, 1e-14);
  }
  const auto again = align_set(aligned, 100);
  EXPECT_EQ(again.find("a")->trajectory, aligned.find("a")->trajectory);
}

TEST(DemonstrationSet, EnforcesIdsAndDimension) {
  DemonstrationSet set;
  set.add({"a", line1d({0, 1}), Label::Successful});
  EXPECT_THROW(set.add({"a", line1d({0, 2}), Label::Failed}), Error);
  EXPECT_THROW(set.add({"b", Trajectory::from_rows({{0, 0}, {1, 1}}), Label::Failed}), Error);
  EXPECT_TRUE(set.relabel("a", Label::Failed));
  EXPECT_TRUE(set.successes().empty());
  EXPECT_EQ(set.failures().size(), 1u);
  EXPECT_FALSE(set.relabel("zz", Label::Failed));
  EXPECT_TRUE(set.remove("a"));
  EXPECT_TRUE(set.empty());
  EXPECT_FALSE(set.dim().has_value());
}

TEST(Labels, ParseAcceptsBothSpellings) {
  EXPECT_EQ(parse_label("success"), Label::Successful);
  EXPECT_EQ(parse_label("successful"), Label::Successful);
  EXPECT_EQ(parse_label("failure"), Label::Failed);
  EXPECT_EQ(parse_label("failed"), Label::Failed);
  EXPECT_FALSE(parse_label("maybe").has_value());
}

TEST(Smooth, Examples) {
  Rng rng(1);
  const Trajectory x(oracle::random_points(rng, 9, 2));
  EXPECT_EQ(smooth(x, 1), x);
  const auto c = smooth(Trajectory(Points::Constant(7, 2, 0.3)), 5);
  EXPECT_LT((c.points().array() - 0.3).abs().maxCoeff(), 1e-15);
  const auto s = smooth(line1d({0, 3, 0}), 3);
  EXPECT_DOUBLE_EQ(s.points()(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(s.points()(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(s.points()(2, 0), 0.0);
  EXPECT_THROW(smooth(x, 4), Error);
  EXPECT_THROW(smooth(x, 11), Error);
}

TEST(Smooth, ShrinkingWindowsAtBoundary) {
  const auto s = smooth(line1d({0, 1, 5, 2, 8, 3, 0}), 5);
  const double expect[] = {0.0, (0 + 1 + 5) / 3.0, (0 + 1 + 5 + 2 + 8) / 5.0, (1 + 5 + 2 + 8 + 3) / 5.0,
                           (5 + 2 + 8 + 3 + 0) / 5.0, (8 + 3 + 0) / 3.0, 0.0};
  for (int i = 0; i < 7; ++i) EXPECT_NEAR(s.points()(i, 0), expect[i], 1e-15);
}

TEST(Frames, CartesianIsIdentity) {
  Rng rng(2);
  const Trajectory x(oracle::random_points(rng, 12, 3));
  EXPECT_EQ(to_frame(x, CoordinateFrame::Cartesian), x);
}

TEST(Frames, ConstantTrajectories) {
  const auto c = Trajectory(Points::Constant(6, 1, 2.5));
  const auto lap = to_frame(c, CoordinateFrame::Laplacian);
  EXPECT_LT(lap.points().cwiseAbs().maxCoeff(), 1e-12);
  const auto tan = to_frame(c, CoordinateFrame::Tangent);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(tan.points()(i, 0), 0.0);
  EXPECT_EQ(tan.points()(5, 0), -2.5);
}

// The arithmetic line x_i = i under the matrix L exactly as printed: the
// boundary rows are (2 x_1 - 2 x_2) / 2 = -1 and (-2 x_4 + 2 x_5) / 2 = 1.
TEST(Frames, LaplacianOfArithmeticLineMatchesDenseProduct) {
  const auto x = line1d({1, 2, 3, 4, 5});
  const Eigen::VectorXd dense = oracle::laplacian_matrix(5) * x.points().col(0);
  const auto lap = to_frame(x, CoordinateFrame::Laplacian);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(lap.points()(i, 0), dense(i), 1e-15);
  const double expect[] = {-1.0, 0.0, 0.0, 0.0, 1.0};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(lap.points()(i, 0), expect[i], 1e-15);
}

TEST(Frames, StencilsMatchDenseMatrices) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto T = static_cast<std::size_t>(3 + rng.index(30));
    const Trajectory x(oracle::random_points(rng, static_cast<Eigen::Index>(T), 3));
    const Points g = oracle::tangent_matrix(T) * x.points();
    const Points l = oracle::laplacian_matrix(T) * x.points();
    EXPECT_LT((to_frame(x, CoordinateFrame::Tangent).points() - g).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((to_frame(x, CoordinateFrame::Laplacian).points() - l).cwiseAbs().maxCoeff(), 1e-12);
    const Points y = oracle::random_points(rng, static_cast<Eigen::Index>(T), 3);
    EXPECT_LT((apply_frame_transpose(y, CoordinateFrame::Laplacian) - oracle::laplacian_matrix(T).transpose() * y)
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
    EXPECT_LT((apply_frame_transpose(y, CoordinateFrame::Tangent) - oracle::tangent_matrix(T).transpose() * y)
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
  }
}

TEST(Frames, Linearity) {
  Rng rng(4);
  const Points x = oracle::random_points(rng, 15, 2), y = oracle::random_points(rng, 15, 2);
  const double a = 1.7, b = -0.4;
  for (auto f : {CoordinateFrame::Cartesian, CoordinateFrame::Tangent, CoordinateFrame::Laplacian}) {
    const Points lhs = apply_frame(a * x + b * y, f);
    const Points rhs = a * apply_frame(x, f) + b * apply_frame(y, f);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12) << to_string(f);
  }
}

TEST(Frames, RejectShortTrajectories) {
  EXPECT_THROW(to_frame(line1d({0, 1}), CoordinateFrame::Laplacian), Error);
  EXPECT_NO_THROW(to_frame(line1d({0, 1}), CoordinateFrame::Tangent));
}

}  // namespace
}  // namespace dualdemo
