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

#include <algorithm>
#include <cmath>

#include "dualdemo/error.hpp"
#include "dualdemo/fixtures.hpp"
#include "dualdemo/mixture.hpp"
#include "dualdemo/random.hpp"
#include "oracles.hpp"

namespace dualdemo {
namespace {

Trajectory line_demo(std::size_t T, double slope, double offset, double noise, Rng& rng) {
  Points p(static_cast<Eigen::Index>(T), 1);
  for (std::size_t i = 0; i < T; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(T - 1);
    p(static_cast<Eigen::Index>(i), 0) = offset + slope * t + (noise > 0.0 ? rng.normal(0.0, noise) : 0.0);
  }
  return Trajectory(p);
}

std::vector<Trajectory> noisy_curves(Rng& rng, int count, std::size_t T, std::size_t n) {
  std::vector<Trajectory> out;
  for (int j = 0; j < count; ++j) {
    Points p(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < T; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(T - 1);
      for (std::size_t d = 0; d < n; ++d)
        p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
            std::sin(3.0 * t + static_cast<double>(d)) + rng.normal(0.0, 0.05);
    }
    out.emplace_back(p);
  }
  return out;
}

bool is_spd(const Eigen::MatrixXd& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff() < 1e-12 && Eigen::LLT<Eigen::MatrixXd>(m).info() == Eigen::Success;
}

TEST(FitEm, StraightLineSlope) {
  Rng rng(0);
  FitConfig cfg;
  const auto model = fit_em({line_demo(100, 2.0, 0.0, 0.0, rng)}, 1, cfg);
  ASSERT_EQ(model.k(), 1u);
  const auto& c = model.components()[0];
  EXPECT_NEAR(c.cov_xt()(0) / c.cov_tt(), 2.0, 1e-6);
}

TEST(FitEm, SingleComponentIsMomentMatching) {
  Rng rng(21);
  const auto demos = noisy_curves(rng, 3, 60, 2);
  const auto model = fit_em(demos, 1, FitConfig{});
  const auto [mean, cov] = oracle::moments(stack_time_space(demos));
  const auto& c = model.components()[0];
  EXPECT_LT((c.mean - mean).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((c.covariance - cov).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(c.prior, 1.0, 1e-12);
}

TEST(FitEm, SeparatedClusters) {
  Rng rng(4);
  std::vector<Trajectory> demos;
  for (int j = 0; j < 4; ++j) demos.push_back(line_demo(50, 0.0, j % 2 == 0 ? 10.0 : -10.0, 0.3, rng));
  const auto model = fit_em(demos, 2, FitConfig{});
  std::vector<double> means;
  for (const auto& c : model.components()) means.push_back(c.mean_x()(0));
  std::sort(means.begin(), means.end());
  // Oracle: nearest-center assignment, then per-cluster sample means.
  double lo = 0.0, hi = 0.0;
  int nlo = 0, nhi = 0;
  const auto rows = stack_time_space(demos);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    if (rows(r, 1) < 0.0) {
      lo += rows(r, 1);
      ++nlo;
    } else {
      hi += rows(r, 1);
      ++nhi;
    }
  }
  EXPECT_NEAR(means[0], lo / nlo, 0.5);
  EXPECT_NEAR(means[1], hi / nhi, 0.5);
  EXPECT_NEAR(means[0], -10.0, 0.5);
  EXPECT_NEAR(means[1], 10.0, 0.5);
}

TEST(FitEm, LogLikelihoodIsMonotone) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const auto demos = noisy_curves(rng, 3, 40, 2);
    FitConfig cfg;
    cfg.seed = seed;
    EmTrace trace;
    fit_em(demos, 1 + static_cast<int>(seed % 4), cfg, &trace);
    ASSERT_GE(trace.log_likelihood.size(), 2u);
    for (std::size_t i = 1; i < trace.log_likelihood.size(); ++i)
      EXPECT_GE(trace.log_likelihood[i], trace.log_likelihood[i - 1] - 1e-9 * std::abs(trace.log_likelihood[i - 1]))
          << "seed " << seed << " iteration " << i;
  }
}

TEST(FitEm, CovariancesArePositiveDefinite) {
  Rng rng(9);
  const auto demos = noisy_curves(rng, 4, 50, 3);
  const auto model = fit_em(demos, 4, FitConfig{});
  double prior_sum = 0.0;
  for (const auto& c : model.components()) {
    EXPECT_TRUE(is_spd(c.covariance));
    EXPECT_GT(c.prior, 0.0);
    prior_sum += c.prior;
  }
  EXPECT_NEAR(prior_sum, 1.0, 1e-9);
}

TEST(FitEm, DeterministicPerSeed) {
  Rng rng(2);
  const auto demos = noisy_curves(rng, 3, 40, 2);
  FitConfig cfg;
  cfg.seed = 77;
  const auto a = fit_em(demos, 3, cfg), b = fit_em(demos, 3, cfg);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(a.components()[k].mean, b.components()[k].mean);
    EXPECT_EQ(a.components()[k].covariance, b.components()[k].covariance);
  }
}

TEST(FitEm, InsufficientData) {
  Rng rng(0);
  // 1 demo * 4 samples < 3 * (1 + 2)
  EXPECT_THROW(fit_em({line_demo(4, 1.0, 0.0, 0.0, rng)}, 3, FitConfig{}), Error);
  EXPECT_THROW(fit_em({}, 1, FitConfig{}), Error);
}

TEST(SelectK, SingletonRange) {
  Rng rng(3);
  const auto demos = noisy_curves(rng, 2, 40, 2);
  FitConfig cfg;
  cfg.k_min = cfg.k_max = 1;
  EXPECT_EQ(select_k_bic(demos, cfg).k(), 1u);
}

TEST(SelectK, ReturnsTableMinimum) {
  Rng rng(12);
  const auto demos = noisy_curves(rng, 3, 50, 2);
  std::vector<BicEntry> table;
  const auto model = select_k_bic(demos, FitConfig{}, &table);
  ASSERT_EQ(table.size(), 6u);
  const std::size_t samples = 150;
  for (const auto& e : table) {
    if (!e.ok) continue;
    const std::size_t n = 2;
    const auto k = static_cast<std::size_t>(e.k);
    EXPECT_EQ(e.parameters, (k - 1) + k * (n + 1) + k * (n + 1) * (n + 2) / 2);
    EXPECT_NEAR(e.bic, -2.0 * e.log_likelihood + static_cast<double>(e.parameters) * std::log(samples), 1e-9);
  }
  const auto chosen = std::find_if(table.begin(), table.end(), [&](const BicEntry& e) {
    return e.k == static_cast<int>(model.k());
  });
  ASSERT_NE(chosen, table.end());
  for (const auto& e : table)
    if (e.ok) {
      EXPECT_LE(chosen->bic, e.bic) << "k=" << e.k;
    }
}

TEST(SelectK, TightBundlePicksFewComponents) {
  Rng rng(31);
  std::vector<Trajectory> demos;
  for (int j = 0; j < 3; ++j) demos.push_back(line_demo(100, 1.0, rng.normal(0.0, 0.005), 0.01, rng));
  std::vector<BicEntry> table;
  const auto model = select_k_bic(demos, FitConfig{}, &table);
  EXPECT_LE(model.k(), 2u);
}

TEST(SelectK, BimodalFixturePicksTwo) {
  const auto f = make_fixture("bimodal", 3);
  const auto model = select_k_bic(f.demonstration_set().trajectories(Label::Successful), f.config.fit);
  EXPECT_EQ(model.k(), 2u);
}

TEST(Gmr, SingleComponentMatchesClosedForm) {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(trial % 3);
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(n + 1, n + 1);
    GaussianComponent c;
    c.prior = 1.0;
    c.mean = Eigen::VectorXd::Random(n + 1);
    c.covariance = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(n + 1, n + 1);
    const MixtureModel model({c}, 1e-9, -1.0, 2.0);
    const auto stamps = time_stamps(25);
    const auto path = gmr(model, stamps);
    for (std::size_t i = 0; i < stamps.size(); ++i) {
      const auto ref = oracle::condition_on_time(c.mean, c.covariance, stamps[i]);
      EXPECT_LT((path.means.row(static_cast<Eigen::Index>(i)).transpose() - ref.mean).cwiseAbs().maxCoeff(), 1e-9);
      EXPECT_LT((path.covariances[i] - ref.cov).cwiseAbs().maxCoeff(), 1e-9);
    }
    EXPECT_FALSE(path.extrapolated);
  }
}

TEST(Gmr, LineFitAtThreeStamps) {
  Rng rng(0);
  const auto model = fit_em({line_demo(100, 2.0, 0.0, 0.0, rng)}, 1, FitConfig{});
  const auto path = gmr(model, {0.0, 0.5, 1.0});
  EXPECT_NEAR(path.means(0, 0), 0.0, 1e-3);
  EXPECT_NEAR(path.means(1, 0), 1.0, 1e-3);
  EXPECT_NEAR(path.means(2, 0), 2.0, 1e-3);
}

TEST(Gmr, DuplicatedComponentsLeaveMeansUnchanged) {
  Rng rng(5);
  const auto demos = noisy_curves(rng, 2, 40, 2);
  const auto single = fit_em(demos, 1, FitConfig{});
  auto half = single.components()[0];
  half.prior = 0.5;
  const MixtureModel doubled({half, half}, single.floor(), single.t_min(), single.t_max());
  const auto stamps = time_stamps(40);
  const auto a = gmr(single, stamps), b = gmr(doubled, stamps);
  EXPECT_LT((a.means - b.means).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Gmr, SplitPriorInvariance) {
  Rng rng(6);
  const auto demos = noisy_curves(rng, 3, 50, 2);
  const auto model = fit_em(demos, 3, FitConfig{});
  std::vector<GaussianComponent> comps = model.components();
  auto extra = comps[1];
  comps[1].prior *= 0.5;
  extra.prior *= 0.5;
  comps.push_back(extra);
  const MixtureModel split(comps, model.floor(), model.t_min(), model.t_max());
  const auto stamps = time_stamps(50);
  EXPECT_LT((gmr(model, stamps).means - gmr(split, stamps).means).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Gmr, CovariancesPassCholeskyAndFlagExtrapolation) {
  Rng rng(7);
  const auto model = fit_em(noisy_curves(rng, 3, 40, 3), 3, FitConfig{});
  const auto path = gmr(model, {-0.2, 0.0, 0.5, 1.0, 1.3});
  EXPECT_TRUE(path.extrapolated);
  for (const auto& cov : path.covariances) EXPECT_TRUE(is_spd(cov));
  EXPECT_FALSE(gmr(model, time_stamps(10)).extrapolated);
}

TEST(MixtureModel, ValidatesPriors) {
  GaussianComponent c;
  c.prior = 0.7;
  c.mean = Eigen::Vector2d(0.5, 0.0);
  c.covariance = Eigen::Matrix2d::Identity();
  EXPECT_THROW(MixtureModel({c}, 1e-6), Error);
  c.prior = 1.0;
  c.covariance(1, 1) = -1.0;
  EXPECT_THROW(MixtureModel({c}, 1e-6), Error);
}

}  // namespace
}  // namespace dualdemo
