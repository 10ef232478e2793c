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
#include <functional>
#include <optional>
#include <string_view>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dualdemo/band_matrix.hpp"
#include "dualdemo/mixture.hpp"
#include "dualdemo/objective.hpp"
#include "dualdemo/trajectory.hpp"

namespace dualdemo {

/// Importance of the Cartesian, tangent and Laplacian encodings.
struct MultiCoordWeights {
  double cartesian = 1.0;
  double tangent = 0.0;
  double laplacian = 0.0;

  double of(CoordinateFrame frame) const noexcept;
  /// All >= 0, at least one > 0.
  void validate() const;
};

/// Regressed models for one coordinate frame, scaled by its alpha.
struct FrameTerm {
  CoordinateFrame frame = CoordinateFrame::Cartesian;
  double alpha = 1.0;
  std::optional<RegressedPath> success;
  std::optional<RegressedPath> failure;
  /// Dissimilarity weights; only used when both paths are present.
  std::vector<double> weights;
};

/// Every ingredient of the scalarized objective
///   sum_k alpha_k J^Q(M_k X) + J^R(X) + (1 / 2 rho) sum C_i^2 [+ repulsion].
struct ObjectiveSpec {
  std::size_t length = 0;
  std::size_t dim = 0;
  std::vector<FrameTerm> frames;
  double lambda = 0.0;
  double gamma = 1.0;
  ConstraintSet constraints;
  /// Bounded failure repulsion used when there are no successful demos.
  std::optional<SuccessField> repulsion;
};

/// Scalar cost of the spec, evaluated term by term through the objective
/// functions (independent of the assembled quadratic).
CostBreakdown evaluate(const ObjectiveSpec& spec, const Points& x);
/// Gradient of evaluate(spec, x).total.
Points evaluate_gradient(const ObjectiveSpec& spec, const Points& x);

/// 1/2 X^T H X + b^T X + c over the time-major stacking of X. H is stored as a
/// scalar band covering block bandwidth 1 (tridiagonal blocks) or 2 when a
/// Laplacian term is active.
struct QuadraticProblem {
  std::size_t length = 0;
  std::size_t dim = 0;
  std::size_t block_bandwidth = 1;
  BandMatrix hessian;
  Eigen::VectorXd linear;
  double constant = 0.0;
  /// The spec the quadratic was assembled from; frame terms are kept for
  /// diagnostics and the cost breakdown.
  ObjectiveSpec spec;

  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
};

/// Expands the quadratic part of `spec` (the repulsion stays non-quadratic).
QuadraticProblem assemble(const ObjectiveSpec& spec);

enum class SolveStatus { DirectSolve, IterativeConverged, IterativeMaxIters, IndefiniteFallback };

std::string_view to_string(SolveStatus status) noexcept;
bool converged(SolveStatus status) noexcept;

struct SolveConfig {
  int max_iters = 5000;
  /// Relative cost change that ends the iterative paths.
  double tolerance = 1e-12;
  /// Trust-region radius (Frobenius norm of X - init) for the indefinite
  /// fallback; <= 0 means unbounded.
  double trust_radius = 0.0;
};

struct SolverReport {
  SolveStatus status = SolveStatus::DirectSolve;
  int iterations = 0;
  CostBreakdown costs;
  double max_residual = 0.0;
};

struct SolveResult {
  Trajectory trajectory;
  SolverReport report;
};

/// Exact minimizer when H is positive definite and there is no repulsion;
/// H-preconditioned descent when a repulsion term is present; projected
/// gradient descent inside the trust region otherwise. The returned cost never
/// exceeds the cost of `init`.
SolveResult solve(const QuadraticProblem& problem, const Trajectory& init, const SolveConfig& cfg);

/// How the failure gain is interpreted. Absolute uses gamma as given.
/// Relative scales it by the critical gain, the supremum of gains for which
/// the assembled Hessian stays positive definite, so gamma in (0, 1) always
/// yields a bounded problem.
enum class GammaMode { Absolute, Relative };

std::string_view to_string(GammaMode mode) noexcept;
GammaMode parse_gamma_mode(std::string_view text);

struct SolverConfig {
  std::size_t length = 100;
  double lambda = 1.0;
  double rho = 1e-3;
  double gamma = 1.0;
  GammaMode gamma_mode = GammaMode::Absolute;
  MultiCoordWeights alphas;
  FitConfig fit;
  SolveConfig solve;
  /// Trust radius = this factor times the bounding-box diagonal of the demos.
  double trust_radius_scale = 2.0;
  /// Lower bound on the repulsion spread, as a fraction of the bounding-box
  /// diagonal of the demos.
  double repulsion_spread = 0.05;
  /// Moving-average window applied to demonstrations when they are imported.
  std::size_t smoothing_window = 5;
};

struct Reproduction {
  Trajectory trajectory;
  SolverReport report;
  SolverConfig config;
  /// Failure gain actually used by the objective.
  double effective_gamma = 0.0;
  /// Regressed models per active frame (for display and diagnostics).
  std::vector<FrameTerm> frames;
};

/// Largest gain g for which the Hessian with spec.gamma = g is positive
/// definite, found by bisection. Infinity when the failure quadratic is
/// inactive or never destroys definiteness; zero when the gain-free Hessian is
/// already indefinite.
double critical_gamma(const ObjectiveSpec& spec);

/// Straight-line interpolation through the constraint targets, held constant
/// before the first and after the last constraint.
Trajectory constraint_interpolant(const ConstraintSet& cs, std::size_t length, std::size_t dim);

/// BIC-selected mixture for one labeled subset of an aligned set, expressed in
/// `frame`. The seed is derived from the frame and label so every subset fits
/// independently of the others.
MixtureModel fit_subset(const DemonstrationSet& aligned, Label label, CoordinateFrame frame, const SolverConfig& cfg,
                        std::vector<BicEntry>* table = nullptr);

/// Builds the objective for an aligned demonstration set: BIC-selected mixture
/// and regression per subset and active frame, dissimilarity weights, and the
/// repulsion when the successful subset is empty.
ObjectiveSpec build_objective(const DemonstrationSet& aligned, const ConstraintSet& cs, const SolverConfig& cfg);

/// align -> fit -> regress -> weights -> assemble -> solve.
Reproduction reproduce(const DemonstrationSet& set, const ConstraintSet& cs, const SolverConfig& cfg);

using Labeler = std::function<Label(const Reproduction&)>;

struct RefineStep {
  Reproduction reproduction;
  Label label;
};

/// Reproduce, label, and on failure append the reproduction to the failed
/// subset of `set`; stops at the first success or after `max_iters` rounds.
std::vector<RefineStep> refine(DemonstrationSet& set, const ConstraintSet& cs, const SolverConfig& cfg,
                               const Labeler& labeler, int max_iters);

}  // namespace dualdemo
