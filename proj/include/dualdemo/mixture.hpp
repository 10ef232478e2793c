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

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "dualdemo/trajectory.hpp"

namespace dualdemo {

/// One component of the joint time-space mixture. Mean and covariance are
/// time-augmented: index 0 is time, indices 1..n are the spatial coordinates.
struct GaussianComponent {
  double prior = 0.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  double mean_t() const { return mean(0); }
  Eigen::VectorXd mean_x() const { return mean.tail(mean.size() - 1); }
  double cov_tt() const { return covariance(0, 0); }
  Eigen::VectorXd cov_xt() const { return covariance.col(0).tail(covariance.rows() - 1); }
  Eigen::MatrixXd cov_xx() const {
    const auto n = covariance.rows() - 1;
    return covariance.bottomRightCorner(n, n);
  }
  /// Sigma_xx - Sigma_xt Sigma_tt^-1 Sigma_tx.
  Eigen::MatrixXd conditional_covariance() const;
};

/// Gaussian mixture over (t, x_1..x_n).
class MixtureModel {
 public:
  /// Validates priors (sum to 1 within 1e-9), shapes and positive definiteness.
  MixtureModel(std::vector<GaussianComponent> components, double floor, double t_min = 0.0, double t_max = 1.0);

  const std::vector<GaussianComponent>& components() const noexcept { return components_; }
  std::size_t k() const noexcept { return components_.size(); }
  /// Spatial dimension n.
  std::size_t dim() const noexcept { return static_cast<std::size_t>(components_.front().mean.size() - 1); }
  double floor() const noexcept { return floor_; }
  double t_min() const noexcept { return t_min_; }
  double t_max() const noexcept { return t_max_; }

  /// Total log-likelihood of stacked (t, x) rows.
  double log_likelihood(const Eigen::MatrixXd& rows) const;

  /// Free parameters: (k - 1) priors, k (n + 1) means, k (n + 1)(n + 2) / 2 covariance entries.
  std::size_t parameter_count() const noexcept;

 private:
  std::vector<GaussianComponent> components_;
  double floor_;
  double t_min_;
  double t_max_;
};

struct FitConfig {
  int k_min = 1;
  int k_max = 6;
  int max_em_iters = 300;
  /// Relative log-likelihood change that ends EM.
  double tolerance = 1e-10;
  /// Covariance floor = floor_scale * mean spatial variance of the data.
  double floor_scale = 1e-6;
  int restarts = 5;
  std::uint64_t seed = 0;
};

struct EmTrace {
  /// Log-likelihood after every E-step of the returned restart.
  std::vector<double> log_likelihood;
  /// Final log-likelihood of every restart; NaN when the restart degenerated.
  std::vector<double> restart_log_likelihood;
};

struct BicEntry {
  int k = 0;
  bool ok = false;
  double log_likelihood = 0.0;
  std::size_t parameters = 0;
  double bic = 0.0;
};

/// Stacks every sample of every demo as a row (t_i, x_i).
Eigen::MatrixXd stack_time_space(const std::vector<Trajectory>& demos);

/// EM with k-means++ seeding; the best of `cfg.restarts` runs is returned.
/// Throws InsufficientData when |demos| * T < k (n + 2) and DegenerateFit when
/// every restart collapses a component.
MixtureModel fit_em(const std::vector<Trajectory>& demos, int k, const FitConfig& cfg, EmTrace* trace = nullptr);

/// Fits every k in [k_min, k_max] and returns the BIC minimizer; ties go to
/// the smaller k.
MixtureModel select_k_bic(const std::vector<Trajectory>& demos, const FitConfig& cfg,
                          std::vector<BicEntry>* table = nullptr);

double bic_score(double log_likelihood, std::size_t parameters, std::size_t samples);

/// Conditional mean and covariance of x given t at each stamp.
struct RegressedPath {
  std::vector<double> time;
  Points means;
  std::vector<Eigen::MatrixXd> covariances;
  /// True when any stamp falls outside the fitted time support.
  bool extrapolated = false;

  std::size_t length() const noexcept { return time.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(means.cols()); }
  Trajectory mean_trajectory() const { return Trajectory(means); }
};

/// Gaussian mixture regression with prior-weighted responsibilities.
RegressedPath gmr(const MixtureModel& model, const std::vector<double>& time);

}  // namespace dualdemo
