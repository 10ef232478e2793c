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
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dualdemo/mixture.hpp"
#include "dualdemo/trajectory.hpp"

namespace dualdemo {

struct PointConstraint {
  std::size_t index = 0;
  Eigen::VectorXd target;
};

/// Indexed point equality constraints handled by the quadratic penalty
/// (1 / 2 rho) sum ||x_i - p_i||^2. Smaller rho binds harder.
struct ConstraintSet {
  std::vector<PointConstraint> entries;
  double rho = 1e-3;

  bool empty() const noexcept { return entries.empty(); }
  /// Indices strictly increasing and below `length`, finite targets of size
  /// `dim`, rho > 0.
  void validate(std::size_t length, std::size_t dim) const;
};

struct CostBreakdown {
  double success_term = 0.0;
  /// Weighted failure term; it enters the total with a minus sign.
  double failure_term = 0.0;
  double elastic_term = 0.0;
  double penalty_term = 0.0;
  double total = 0.0;

  static CostBreakdown make(double success, double failure, double elastic, double penalty) {
    return {success, failure, elastic, penalty, success - failure + elastic + penalty};
  }
};

/// Inverse of every per-step covariance of a regressed path.
std::vector<Eigen::MatrixXd> precisions(const RegressedPath& path);

/// sum_t (x_t - m_t)^T Sigma_t^-1 (x_t - m_t).
double quad_cost(const Points& x, const RegressedPath& path);
Points quad_cost_gradient(const Points& x, const RegressedPath& path);

/// Per-step ||m_s(t) - m_f(t)||_2 without normalization.
std::vector<double> dissimilarity_raw(const Points& success_means, const Points& failure_means);
/// Raw dissimilarity scaled so that its maximum is 1; all zero when the means
/// coincide everywhere.
std::vector<double> dissimilarity_weights(const Points& success_means, const Points& failure_means);

/// J_s - gamma sum_t w_t J_f(t). Either path may be absent, not both.
double combined_quad(const Points& x, const RegressedPath* success, const RegressedPath* failure,
                     const std::vector<double>& weights, double gamma);
Points combined_quad_gradient(const Points& x, const RegressedPath* success, const RegressedPath* failure,
                              const std::vector<double>& weights, double gamma);
/// The weighted failure sum alone: gamma sum_t w_t J_f(t).
double weighted_failure_cost(const Points& x, const RegressedPath& failure, const std::vector<double>& weights,
                             double gamma);

/// (lambda / 2) sum_i ||x_i - x_{i-1}||^2.
double elastic_energy(const Points& x, double lambda);
Points elastic_energy_gradient(const Points& x, double lambda);

/// (1 / 2 rho) sum ||x_{t_i} - p_i||^2.
double penalty(const Points& x, const ConstraintSet& cs);
Points penalty_gradient(const Points& x, const ConstraintSet& cs);
/// Largest constraint residual norm; 0 without constraints.
double max_constraint_residual(const Points& x, const ConstraintSet& cs);

/// Gaussian success model over time and space: every demonstration places an
/// isotropic Gaussian at each of its samples, signed +1 for successes and -1
/// for failures.
struct FieldDemo {
  Points centers;
  /// Spread per sample; all > 0.
  std::vector<double> spreads;
  Label label = Label::Successful;
};

struct SuccessField {
  std::vector<FieldDemo> demos;
  double attractor_gain = 100.0;
  double spring = 0.0;
  /// Multiplies the signed density sum.
  double density_weight = 1.0;

  /// One field demo per demonstration with a shared spread.
  static SuccessField from_demonstrations(const DemonstrationSet& set, double spread, double spring);
  void validate(std::size_t length, std::size_t dim) const;
};

struct FieldTerms {
  double attraction = 0.0;  // G
  double spring = 0.0;      // K
  double success = 0.0;     // S
  double total() const noexcept { return attraction + spring - success; }
};

/// Isotropic normal density N(x; mu, sigma^2 I).
double isotropic_density(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& mu,
                         double sigma);

FieldTerms success_field_terms(const Points& x, const SuccessField& field, const ConstraintSet& attractors);
/// G + K - S.
double success_field_cost(const Points& x, const SuccessField& field, const ConstraintSet& attractors);
Points success_field_gradient(const Points& x, const SuccessField& field, const ConstraintSet& attractors);

}  // namespace dualdemo
