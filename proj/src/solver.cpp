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

#include "dualdemo/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "dualdemo/error.hpp"
#include "dualdemo/random.hpp"

namespace dualdemo {

namespace {

constexpr std::array<CoordinateFrame, 3> kFrames = {CoordinateFrame::Cartesian, CoordinateFrame::Tangent,
                                                    CoordinateFrame::Laplacian};

bool failure_active(const FrameTerm& f) { return f.success.has_value() && f.failure.has_value(); }

Points unflatten(const Eigen::VectorXd& v, std::size_t length, std::size_t dim) {
  Points p(static_cast<Eigen::Index>(length), static_cast<Eigen::Index>(dim));
  std::copy(v.data(), v.data() + v.size(), p.data());
  return p;
}

Eigen::VectorXd flatten(const Points& p) { return Eigen::Map<const Eigen::VectorXd>(p.data(), p.size()); }

/// Adds a dense n x n block at block position (bi, bj), bi >= bj, to the
/// lower band.
void add_block(BandMatrix& h, std::size_t bi, std::size_t bj, const Eigen::MatrixXd& block) {
  const auto n = static_cast<std::size_t>(block.rows());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t s = 0; s < n; ++s) {
      if (bi == bj && s > r) continue;
      h.add(bi * n + r, bj * n + s, block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)));
    }
  }
}

struct Objective {
  const QuadraticProblem& q;

  double value(const Eigen::VectorXd& x) const {
    double v = q.value(x);
    if (q.spec.repulsion) v += success_field_cost(unflatten(x, q.length, q.dim), *q.spec.repulsion, {});
    return v;
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    Eigen::VectorXd g = q.gradient(x);
    if (q.spec.repulsion) g += flatten(success_field_gradient(unflatten(x, q.length, q.dim), *q.spec.repulsion, {}));
    return g;
  }
};

void check_finite(const Eigen::VectorXd& x, double f, int iter) {
  require(x.allFinite() && std::isfinite(f), ErrorCode::Numeric,
          "non-finite value during iteration " + std::to_string(iter));
}

bool small_change(double before, double after, double tol) {
  return std::abs(before - after) <= tol * std::max(1.0, std::abs(before));
}

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& center, double radius) {
  if (radius <= 0.0) return x;
  const Eigen::VectorXd d = x - center;
  const double norm = d.norm();
  if (norm <= radius) return x;
  return center + d * (radius / norm);
}

double bounding_box_diagonal(const DemonstrationSet& set) {
  Eigen::RowVectorXd lo, hi;
  bool first = true;
  for (const auto* bucket : {&set.successes(), &set.failures()}) {
    for (const auto& d : *bucket) {
      const auto& p = d.trajectory.points();
      if (first) {
        lo = p.colwise().minCoeff();
        hi = p.colwise().maxCoeff();
        first = false;
      } else {
        lo = lo.cwiseMin(p.colwise().minCoeff());
        hi = hi.cwiseMax(p.colwise().maxCoeff());
      }
    }
  }
  return first ? 0.0 : (hi - lo).norm();
}

}  // namespace

double MultiCoordWeights::of(CoordinateFrame frame) const noexcept {
  switch (frame) {
    case CoordinateFrame::Cartesian: return cartesian;
    case CoordinateFrame::Tangent: return tangent;
    case CoordinateFrame::Laplacian: return laplacian;
  }
  return 0.0;
}

void MultiCoordWeights::validate() const {
  require(cartesian >= 0.0 && tangent >= 0.0 && laplacian >= 0.0, ErrorCode::InvalidArgument,
          "coordinate weights must be non-negative");
  require(cartesian > 0.0 || tangent > 0.0 || laplacian > 0.0, ErrorCode::InvalidArgument,
          "at least one coordinate weight must be positive");
}

CostBreakdown evaluate(const ObjectiveSpec& spec, const Points& x) {
  double success = 0.0;
  double failure = 0.0;
  for (const auto& f : spec.frames) {
    const Points y = apply_frame(x, f.frame);
    if (f.success) success += f.alpha * quad_cost(y, *f.success);
    if (failure_active(f)) failure += f.alpha * weighted_failure_cost(y, *f.failure, f.weights, spec.gamma);
  }
  if (spec.repulsion) failure -= success_field_cost(x, *spec.repulsion, {});
  return CostBreakdown::make(success, failure, elastic_energy(x, spec.lambda), penalty(x, spec.constraints));
}

Points evaluate_gradient(const ObjectiveSpec& spec, const Points& x) {
  Points g = elastic_energy_gradient(x, spec.lambda) + penalty_gradient(x, spec.constraints);
  for (const auto& f : spec.frames) {
    const Points y = apply_frame(x, f.frame);
    const RegressedPath* s = f.success ? &*f.success : nullptr;
    const RegressedPath* fl = failure_active(f) ? &*f.failure : nullptr;
    if (!s && !fl) continue;
    g += f.alpha * apply_frame_transpose(combined_quad_gradient(y, s, fl, f.weights, spec.gamma), f.frame);
  }
  if (spec.repulsion) g += success_field_gradient(x, *spec.repulsion, {});
  return g;
}

double QuadraticProblem::value(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(hessian.multiply(x)) + linear.dot(x) + constant;
}

Eigen::VectorXd QuadraticProblem::gradient(const Eigen::VectorXd& x) const { return hessian.multiply(x) + linear; }

QuadraticProblem assemble(const ObjectiveSpec& spec) {
  const std::size_t len = spec.length;
  const std::size_t n = spec.dim;
  require(len >= 2 && n >= 1, ErrorCode::InvalidArgument, "objective needs length >= 2 and dim >= 1");
  require(spec.lambda >= 0.0, ErrorCode::InvalidArgument, "lambda must be non-negative");
  spec.constraints.validate(len, n);

  std::size_t bw = 1;
  for (const auto& f : spec.frames) {
    require(f.alpha >= 0.0, ErrorCode::InvalidArgument, "frame weight must be non-negative");
    for (const auto* p : {f.success ? &*f.success : nullptr, f.failure ? &*f.failure : nullptr}) {
      if (!p) continue;
      require(p->length() == len && p->dim() == n, ErrorCode::InvalidArgument,
              std::string("dimension mismatch in ") + std::string(to_string(f.frame)) + " frame model");
    }
    if (failure_active(f))
      require(f.weights.size() == len, ErrorCode::InvalidArgument, "dissimilarity weights length mismatch");
    if (f.frame == CoordinateFrame::Laplacian && f.alpha > 0.0 && (f.success || f.failure)) bw = 2;
  }

  QuadraticProblem q;
  q.length = len;
  q.dim = n;
  q.block_bandwidth = bw;
  q.hessian = BandMatrix(len * n, (bw + 1) * n - 1);
  q.linear = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(len * n));
  q.spec = spec;

  const auto ni = static_cast<Eigen::Index>(n);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(ni, ni);
  for (const auto& f : spec.frames) {
    if (f.alpha == 0.0 || (!f.success && !failure_active(f))) continue;
    const auto stencil = frame_stencil(f.frame, len);
    const auto succ_prec = f.success ? precisions(*f.success) : std::vector<Eigen::MatrixXd>{};
    const auto fail_prec = failure_active(f) ? precisions(*f.failure) : std::vector<Eigen::MatrixXd>{};
    for (std::size_t t = 0; t < len; ++t) {
      const auto row = static_cast<Eigen::Index>(t);
      // Per-row quadratic y^T P y - 2 r^T y + c in frame coordinates.
      Eigen::MatrixXd p = Eigen::MatrixXd::Zero(ni, ni);
      Eigen::VectorXd r = Eigen::VectorXd::Zero(ni);
      double c = 0.0;
      if (f.success) {
        const Eigen::VectorXd m = f.success->means.row(row).transpose();
        const Eigen::VectorXd am = succ_prec[t] * m;
        p += succ_prec[t];
        r += am;
        c += m.dot(am);
      }
      if (failure_active(f) && f.weights[t] != 0.0) {
        const double w = spec.gamma * f.weights[t];
        const Eigen::VectorXd m = f.failure->means.row(row).transpose();
        const Eigen::VectorXd bm = fail_prec[t] * m;
        p -= w * fail_prec[t];
        r -= w * bm;
        c -= w * m.dot(bm);
      }
      p *= f.alpha;
      r *= f.alpha;
      c *= f.alpha;
      const auto& taps = stencil[t];
      for (std::size_t a = 0; a < taps.count; ++a) {
        q.linear.segment(static_cast<Eigen::Index>(taps.cols[a] * n), ni) -= 2.0 * taps.coeffs[a] * r;
        for (std::size_t b = 0; b < taps.count; ++b) {
          if (taps.cols[a] < taps.cols[b]) continue;
          add_block(q.hessian, taps.cols[a], taps.cols[b], 2.0 * taps.coeffs[a] * taps.coeffs[b] * p);
        }
      }
      q.constant += c;
    }
  }

  if (spec.lambda > 0.0) {
    for (std::size_t i = 1; i < len; ++i) {
      add_block(q.hessian, i, i, spec.lambda * eye);
      add_block(q.hessian, i - 1, i - 1, spec.lambda * eye);
      add_block(q.hessian, i, i - 1, -spec.lambda * eye);
    }
  }

  const double inv_rho = 1.0 / spec.constraints.rho;
  for (const auto& e : spec.constraints.entries) {
    add_block(q.hessian, e.index, e.index, inv_rho * eye);
    q.linear.segment(static_cast<Eigen::Index>(e.index * n), ni) -= inv_rho * e.target;
    q.constant += 0.5 * inv_rho * e.target.squaredNorm();
  }
  return q;
}

std::string_view to_string(SolveStatus status) noexcept {
  switch (status) {
    case SolveStatus::DirectSolve: return "direct_solve";
    case SolveStatus::IterativeConverged: return "iterative_converged";
    case SolveStatus::IterativeMaxIters: return "iterative_max_iters";
    case SolveStatus::IndefiniteFallback: return "indefinite_fallback";
  }
  return "unknown";
}

bool converged(SolveStatus status) noexcept {
  return status == SolveStatus::DirectSolve || status == SolveStatus::IterativeConverged;
}

SolveResult solve(const QuadraticProblem& problem, const Trajectory& init, const SolveConfig& cfg) {
  require(init.length() == problem.length && init.dim() == problem.dim, ErrorCode::InvalidArgument,
          "initial trajectory does not match the problem dimensions");
  const Objective obj{problem};
  const Eigen::VectorXd x0 = init.flat();
  const BandCholesky chol(problem.hessian);

  Eigen::VectorXd x = x0;
  SolverReport report;

  if (chol.ok() && !problem.spec.repulsion) {
    x = chol.solve(-problem.linear);
    check_finite(x, problem.value(x), 0);
    report.status = SolveStatus::DirectSolve;
  } else if (chol.ok()) {
    // Quadratic part is SPD: descend along -H^-1 grad with backtracking.
    double fx = obj.value(x);
    check_finite(x, fx, 0);
    report.status = SolveStatus::IterativeMaxIters;
    for (int it = 1; it <= cfg.max_iters; ++it) {
      report.iterations = it;
      const Eigen::VectorXd g = obj.gradient(x);
      const Eigen::VectorXd d = -chol.solve(g);
      const double slope = g.dot(d);
      if (!(slope < 0.0)) {
        report.status = SolveStatus::IterativeConverged;
        break;
      }
      double step = 1.0;
      bool accepted = false;
      Eigen::VectorXd xn;
      double fn = fx;
      for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
        xn = x + step * d;
        fn = obj.value(xn);
        if (std::isfinite(fn) && fn <= fx + 1e-4 * step * slope) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        report.status = SolveStatus::IterativeConverged;
        break;
      }
      check_finite(xn, fn, it);
      const bool done = small_change(fx, fn, cfg.tolerance);
      x = std::move(xn);
      fx = fn;
      if (done) {
        report.status = SolveStatus::IterativeConverged;
        break;
      }
    }
  } else {
    // Not positive definite: projected gradient descent inside the trust
    // region around the initial guess.
    report.status = SolveStatus::IndefiniteFallback;
    double lipschitz = 0.0;
    for (std::size_t i = 0; i < problem.hessian.size(); ++i) {
      double row = 0.0;
      const std::size_t lo = i > problem.hessian.bandwidth() ? i - problem.hessian.bandwidth() : 0;
      const std::size_t hi = std::min(problem.hessian.size(), i + problem.hessian.bandwidth() + 1);
      for (std::size_t j = lo; j < hi; ++j) row += std::abs(problem.hessian(i, j));
      lipschitz = std::max(lipschitz, row);
    }
    double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;
    double fx = obj.value(x);
    check_finite(x, fx, 0);
    for (int it = 1; it <= cfg.max_iters; ++it) {
      report.iterations = it;
      const Eigen::VectorXd g = obj.gradient(x);
      bool accepted = false;
      Eigen::VectorXd xn;
      double fn = fx;
      for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
        xn = project(x - step * g, x0, cfg.trust_radius);
        fn = obj.value(xn);
        if (std::isfinite(fn) && fn <= fx + 1e-4 * g.dot(xn - x)) {
          accepted = true;
          break;
        }
      }
      if (!accepted || (xn - x).norm() <= 1e-14 * (1.0 + x.norm())) break;
      check_finite(xn, fn, it);
      const bool done = small_change(fx, fn, cfg.tolerance);
      x = std::move(xn);
      fx = fn;
      step *= 2.0;
      if (done) break;
    }
  }

  Trajectory out(unflatten(x, problem.length, problem.dim));
  report.costs = evaluate(problem.spec, out.points());
  report.max_residual = max_constraint_residual(out.points(), problem.spec.constraints);
  return {std::move(out), report};
}

std::string_view to_string(GammaMode mode) noexcept {
  return mode == GammaMode::Relative ? "relative" : "absolute";
}

GammaMode parse_gamma_mode(std::string_view text) {
  if (text == "absolute") return GammaMode::Absolute;
  if (text == "relative") return GammaMode::Relative;
  throw Error(ErrorCode::InvalidArgument, "unknown gamma mode '" + std::string(text) + "'");
}

double critical_gamma(const ObjectiveSpec& spec) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (std::none_of(spec.frames.begin(), spec.frames.end(), failure_active)) return kInf;
  ObjectiveSpec probe = spec;
  probe.gamma = 0.0;
  const BandMatrix base = assemble(probe).hessian;
  probe.gamma = 1.0;
  BandMatrix slope = assemble(probe).hessian;
  slope.axpy(-1.0, base);
  auto definite = [&](double g) {
    BandMatrix h = base;
    h.axpy(g, slope);
    return BandCholesky(h).ok();
  };
  if (!definite(0.0)) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (definite(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) return kInf;
  }
  for (int i = 0; i < 60 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (definite(mid) ? lo : hi) = mid;
  }
  return lo;
}

Trajectory constraint_interpolant(const ConstraintSet& cs, std::size_t length, std::size_t dim) {
  require(!cs.empty(), ErrorCode::InvalidArgument, "no constraints to interpolate");
  cs.validate(length, dim);
  Points p(static_cast<Eigen::Index>(length), static_cast<Eigen::Index>(dim));
  const auto& e = cs.entries;
  for (std::size_t i = 0; i < length; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    if (i <= e.front().index) {
      p.row(row) = e.front().target.transpose();
    } else if (i >= e.back().index) {
      p.row(row) = e.back().target.transpose();
    } else {
      std::size_t k = 0;
      while (e[k + 1].index < i) ++k;
      const double f = static_cast<double>(i - e[k].index) / static_cast<double>(e[k + 1].index - e[k].index);
      p.row(row) = (e[k].target + f * (e[k + 1].target - e[k].target)).transpose();
    }
  }
  return Trajectory(std::move(p));
}

MixtureModel fit_subset(const DemonstrationSet& aligned, Label label, CoordinateFrame frame, const SolverConfig& cfg,
                        std::vector<BicEntry>* table) {
  auto demos = aligned.trajectories(label);
  require(!demos.empty(), ErrorCode::InsufficientData, "no " + std::string(to_string(label)) + " demonstrations to fit");
  for (auto& d : demos) d = to_frame(d, frame);
  FitConfig fit = cfg.fit;
  fit.seed = Rng::derive(cfg.fit.seed, static_cast<std::uint64_t>(frame) * 2 + (label == Label::Failed ? 1 : 0));
  return select_k_bic(demos, fit, table);
}

ObjectiveSpec build_objective(const DemonstrationSet& aligned, const ConstraintSet& cs, const SolverConfig& cfg) {
  require(!aligned.empty(), ErrorCode::InvalidArgument, "empty demonstration set");
  cfg.alphas.validate();
  const std::size_t len = cfg.length;
  const std::size_t n = *aligned.dim();
  cs.validate(len, n);

  ObjectiveSpec spec;
  spec.length = len;
  spec.dim = n;
  spec.lambda = cfg.lambda;
  spec.gamma = cfg.gamma;
  spec.constraints = cs;
  spec.constraints.rho = cfg.rho;

  const auto stamps = time_stamps(len);
  auto regress = [&](Label label, CoordinateFrame frame) -> std::optional<RegressedPath> {
    if (aligned.trajectories(label).empty()) return std::nullopt;
    return gmr(fit_subset(aligned, label, frame, cfg), stamps);
  };

  for (auto frame : kFrames) {
    const double alpha = cfg.alphas.of(frame);
    if (alpha <= 0.0) continue;
    FrameTerm term;
    term.frame = frame;
    term.alpha = alpha;
    term.success = regress(Label::Successful, frame);
    term.failure = regress(Label::Failed, frame);
    if (term.success && term.failure) term.weights = dissimilarity_weights(term.success->means, term.failure->means);
    spec.frames.push_back(std::move(term));
  }

  if (aligned.successes().empty()) {
    // Without successes the subtracted quadratic is unbounded below; a bounded
    // Gaussian repulsion around the failed mean replaces it.
    std::optional<RegressedPath> failed;
    for (const auto& f : spec.frames)
      if (f.frame == CoordinateFrame::Cartesian) failed = f.failure;
    if (!failed) failed = regress(Label::Failed, CoordinateFrame::Cartesian);
    const double min_spread = std::max(cfg.repulsion_spread * bounding_box_diagonal(aligned), 1e-9);
    FieldDemo demo;
    demo.centers = failed->means;
    demo.label = Label::Failed;
    demo.spreads.resize(len);
    for (std::size_t t = 0; t < len; ++t)
      demo.spreads[t] = std::max(std::sqrt(failed->covariances[t].trace() / static_cast<double>(n)), min_spread);
    SuccessField field;
    field.attractor_gain = 0.0;
    field.spring = 0.0;
    field.density_weight = cfg.gamma;
    field.demos.push_back(std::move(demo));
    spec.repulsion = std::move(field);
  }
  return spec;
}

Reproduction reproduce(const DemonstrationSet& set, const ConstraintSet& cs, const SolverConfig& cfg) {
  require(!set.empty(), ErrorCode::InvalidArgument, "cannot reproduce from an empty demonstration set");
  const DemonstrationSet aligned = align_set(set, cfg.length);
  ObjectiveSpec spec = build_objective(aligned, cs, cfg);
  if (cfg.gamma_mode == GammaMode::Relative) {
    const double critical = critical_gamma(spec);
    if (std::isfinite(critical)) spec.gamma = cfg.gamma * critical;
  }
  const QuadraticProblem problem = assemble(spec);

  std::optional<Trajectory> init;
  for (const auto& f : spec.frames) {
    if (f.frame == CoordinateFrame::Cartesian && f.success) init = f.success->mean_trajectory();
  }
  if (!init && !aligned.successes().empty()) {
    FitConfig fit = cfg.fit;
    fit.seed = Rng::derive(cfg.fit.seed, 0);
    init = gmr(select_k_bic(aligned.trajectories(Label::Successful), fit), time_stamps(cfg.length))
               .mean_trajectory();
  }
  if (!init && !cs.empty()) init = constraint_interpolant(cs, cfg.length, spec.dim);
  if (!init) init = Trajectory(Points::Zero(static_cast<Eigen::Index>(cfg.length), static_cast<Eigen::Index>(spec.dim)));

  SolveConfig sc = cfg.solve;
  sc.trust_radius = cfg.trust_radius_scale * bounding_box_diagonal(aligned);
  auto result = solve(problem, *init, sc);
  return {std::move(result.trajectory), result.report, cfg, spec.gamma, std::move(spec.frames)};
}

std::vector<RefineStep> refine(DemonstrationSet& set, const ConstraintSet& cs, const SolverConfig& cfg,
                               const Labeler& labeler, int max_iters) {
  require(max_iters >= 1, ErrorCode::InvalidArgument, "max_iters must be >= 1");
  require(static_cast<bool>(labeler), ErrorCode::InvalidArgument, "refine needs a labeler");
  std::vector<RefineStep> history;
  for (int it = 0; it < max_iters; ++it) {
    Reproduction rep = reproduce(set, cs, cfg);
    const Label label = labeler(rep);
    if (label == Label::Failed) {
      std::string id = "refine-" + std::to_string(it + 1);
      for (int suffix = 2; set.find(id) != nullptr; ++suffix) id = "refine-" + std::to_string(it + 1) + "-" + std::to_string(suffix);
      set.add({id, rep.trajectory, Label::Failed});
    }
    history.push_back({std::move(rep), label});
    if (label == Label::Successful) break;
  }
  return history;
}

}  // namespace dualdemo
