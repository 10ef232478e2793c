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

#include "dualdemo/objective.hpp"

#include <algorithm>
#include <cmath>

#include "dualdemo/error.hpp"

namespace dualdemo {

namespace {

void check_shape(const Points& x, const RegressedPath& path) {
  require(static_cast<std::size_t>(x.rows()) == path.length() && static_cast<std::size_t>(x.cols()) == path.dim(),
          ErrorCode::InvalidArgument, "trajectory and regressed path disagree in length or dimension");
}

Eigen::LLT<Eigen::MatrixXd> factor_cov(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  require(llt.info() == Eigen::Success, ErrorCode::Numeric, "covariance inversion failed");
  return llt;
}

}  // namespace

void ConstraintSet::validate(std::size_t length, std::size_t dim) const {
  require(rho > 0.0 && std::isfinite(rho), ErrorCode::InvalidArgument, "constraint rho must be positive");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    require(e.index < length, ErrorCode::InvalidArgument,
            "constraint index " + std::to_string(e.index) + " out of range [0, " + std::to_string(length) + ")");
    require(i == 0 || entries[i - 1].index < e.index, ErrorCode::InvalidArgument,
            "constraint indices must be unique and strictly increasing");
    require(static_cast<std::size_t>(e.target.size()) == dim, ErrorCode::InvalidArgument,
            "constraint target dimension mismatch at index " + std::to_string(e.index));
    require(e.target.allFinite(), ErrorCode::InvalidArgument, "constraint target is not finite");
  }
}

std::vector<Eigen::MatrixXd> precisions(const RegressedPath& path) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(path.length());
  for (const auto& c : path.covariances) {
    const auto llt = factor_cov(c);
    out.push_back(llt.solve(Eigen::MatrixXd::Identity(c.rows(), c.cols())));
    out.back() = 0.5 * (out.back() + out.back().transpose()).eval();
  }
  return out;
}

double quad_cost(const Points& x, const RegressedPath& path) {
  check_shape(x, path);
  double sum = 0.0;
  for (std::size_t t = 0; t < path.length(); ++t) {
    const auto row = static_cast<Eigen::Index>(t);
    const Eigen::VectorXd r = (x.row(row) - path.means.row(row)).transpose();
    const auto llt = factor_cov(path.covariances[t]);
    sum += llt.matrixL().solve(r).squaredNorm();
  }
  return sum;
}

Points quad_cost_gradient(const Points& x, const RegressedPath& path) {
  check_shape(x, path);
  Points g(x.rows(), x.cols());
  for (std::size_t t = 0; t < path.length(); ++t) {
    const auto row = static_cast<Eigen::Index>(t);
    const Eigen::VectorXd r = (x.row(row) - path.means.row(row)).transpose();
    g.row(row) = 2.0 * factor_cov(path.covariances[t]).solve(r).transpose();
  }
  return g;
}

std::vector<double> dissimilarity_raw(const Points& success_means, const Points& failure_means) {
  require(success_means.rows() == failure_means.rows() && success_means.cols() == failure_means.cols(),
          ErrorCode::InvalidArgument, "mean sequences disagree in length or dimension");
  std::vector<double> w(static_cast<std::size_t>(success_means.rows()));
  for (Eigen::Index t = 0; t < success_means.rows(); ++t)
    w[static_cast<std::size_t>(t)] = (success_means.row(t) - failure_means.row(t)).norm();
  return w;
}

std::vector<double> dissimilarity_weights(const Points& success_means, const Points& failure_means) {
  auto w = dissimilarity_raw(success_means, failure_means);
  const double peak = w.empty() ? 0.0 : *std::max_element(w.begin(), w.end());
  if (peak > 0.0) {
    for (double& v : w) v /= peak;
  } else {
    std::fill(w.begin(), w.end(), 0.0);
  }
  return w;
}

double weighted_failure_cost(const Points& x, const RegressedPath& failure, const std::vector<double>& weights,
                             double gamma) {
  check_shape(x, failure);
  require(weights.size() == failure.length(), ErrorCode::InvalidArgument, "dissimilarity weights length mismatch");
  double sum = 0.0;
  for (std::size_t t = 0; t < failure.length(); ++t) {
    if (weights[t] == 0.0) continue;
    const auto row = static_cast<Eigen::Index>(t);
    const Eigen::VectorXd r = (x.row(row) - failure.means.row(row)).transpose();
    sum += weights[t] * factor_cov(failure.covariances[t]).matrixL().solve(r).squaredNorm();
  }
  return gamma * sum;
}

double combined_quad(const Points& x, const RegressedPath* success, const RegressedPath* failure,
                     const std::vector<double>& weights, double gamma) {
  require(success != nullptr || failure != nullptr, ErrorCode::InvalidArgument,
          "combined cost needs a success or a failure path");
  double j = 0.0;
  if (success) j += quad_cost(x, *success);
  if (failure) j -= weighted_failure_cost(x, *failure, weights, gamma);
  return j;
}

Points combined_quad_gradient(const Points& x, const RegressedPath* success, const RegressedPath* failure,
                              const std::vector<double>& weights, double gamma) {
  require(success != nullptr || failure != nullptr, ErrorCode::InvalidArgument,
          "combined cost needs a success or a failure path");
  Points g = Points::Zero(x.rows(), x.cols());
  if (success) g += quad_cost_gradient(x, *success);
  if (failure) {
    check_shape(x, *failure);
    require(weights.size() == failure->length(), ErrorCode::InvalidArgument, "dissimilarity weights length mismatch");
    for (std::size_t t = 0; t < failure->length(); ++t) {
      const auto row = static_cast<Eigen::Index>(t);
      const Eigen::VectorXd r = (x.row(row) - failure->means.row(row)).transpose();
      g.row(row) -= 2.0 * gamma * weights[t] * factor_cov(failure->covariances[t]).solve(r).transpose();
    }
  }
  return g;
}

double elastic_energy(const Points& x, double lambda) {
  require(x.rows() >= 2, ErrorCode::InvalidArgument, "elastic energy needs at least 2 samples");
  double sum = 0.0;
  for (Eigen::Index i = 1; i < x.rows(); ++i) sum += (x.row(i) - x.row(i - 1)).squaredNorm();
  return 0.5 * lambda * sum;
}

Points elastic_energy_gradient(const Points& x, double lambda) {
  Points g = Points::Zero(x.rows(), x.cols());
  for (Eigen::Index i = 1; i < x.rows(); ++i) {
    const Eigen::RowVectorXd d = lambda * (x.row(i) - x.row(i - 1));
    g.row(i) += d;
    g.row(i - 1) -= d;
  }
  return g;
}

double penalty(const Points& x, const ConstraintSet& cs) {
  cs.validate(static_cast<std::size_t>(x.rows()), static_cast<std::size_t>(x.cols()));
  double sum = 0.0;
  for (const auto& e : cs.entries)
    sum += (x.row(static_cast<Eigen::Index>(e.index)).transpose() - e.target).squaredNorm();
  return sum / (2.0 * cs.rho);
}

Points penalty_gradient(const Points& x, const ConstraintSet& cs) {
  cs.validate(static_cast<std::size_t>(x.rows()), static_cast<std::size_t>(x.cols()));
  Points g = Points::Zero(x.rows(), x.cols());
  for (const auto& e : cs.entries) {
    const auto row = static_cast<Eigen::Index>(e.index);
    g.row(row) += (x.row(row) - e.target.transpose()) / cs.rho;
  }
  return g;
}

double max_constraint_residual(const Points& x, const ConstraintSet& cs) {
  double worst = 0.0;
  for (const auto& e : cs.entries)
    worst = std::max(worst, (x.row(static_cast<Eigen::Index>(e.index)).transpose() - e.target).norm());
  return worst;
}

SuccessField SuccessField::from_demonstrations(const DemonstrationSet& set, double spread, double spring) {
  SuccessField f;
  f.spring = spring;
  for (const auto* bucket : {&set.successes(), &set.failures()}) {
    for (const auto& d : *bucket)
      f.demos.push_back({d.trajectory.points(), std::vector<double>(d.trajectory.length(), spread), d.label});
  }
  return f;
}

void SuccessField::validate(std::size_t length, std::size_t dim) const {
  for (const auto& d : demos) {
    require(static_cast<std::size_t>(d.centers.rows()) == length && static_cast<std::size_t>(d.centers.cols()) == dim,
            ErrorCode::InvalidArgument, "success field and trajectory disagree in length or dimension");
    require(d.spreads.size() == length, ErrorCode::InvalidArgument, "success field spread count mismatch");
    for (double s : d.spreads)
      require(s > 0.0 && std::isfinite(s), ErrorCode::InvalidArgument, "success field spread must be positive");
  }
}

double isotropic_density(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& mu,
                         double sigma) {
  const double n = static_cast<double>(x.size());
  const double var = sigma * sigma;
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::exp(-0.5 * (x - mu).squaredNorm() / var) / std::pow(two_pi * var, 0.5 * n);
}

FieldTerms success_field_terms(const Points& x, const SuccessField& field, const ConstraintSet& attractors) {
  const auto len = static_cast<std::size_t>(x.rows());
  field.validate(len, static_cast<std::size_t>(x.cols()));
  for (const auto& a : attractors.entries) {
    require(a.index < len && static_cast<Eigen::Index>(a.target.size()) == x.cols(), ErrorCode::InvalidArgument,
            "attractor out of range or of wrong dimension");
  }
  FieldTerms terms;
  for (const auto& a : attractors.entries)
    terms.attraction += std::exp((x.row(static_cast<Eigen::Index>(a.index)).transpose() - a.target).norm());
  terms.attraction *= field.attractor_gain;
  for (Eigen::Index i = 0; i + 1 < x.rows(); ++i) terms.spring += (x.row(i) - x.row(i + 1)).squaredNorm();
  terms.spring *= 0.5 * field.spring;
  for (const auto& d : field.demos) {
    const double sign = d.label == Label::Successful ? 1.0 : -1.0;
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      s += isotropic_density(x.row(i).transpose(), d.centers.row(i).transpose(), d.spreads[static_cast<std::size_t>(i)]);
    terms.success += sign * s;
  }
  terms.success *= field.density_weight;
  return terms;
}

double success_field_cost(const Points& x, const SuccessField& field, const ConstraintSet& attractors) {
  return success_field_terms(x, field, attractors).total();
}

Points success_field_gradient(const Points& x, const SuccessField& field, const ConstraintSet& attractors) {
  const auto len = static_cast<std::size_t>(x.rows());
  field.validate(len, static_cast<std::size_t>(x.cols()));
  Points g = Points::Zero(x.rows(), x.cols());
  for (const auto& a : attractors.entries) {
    const auto row = static_cast<Eigen::Index>(a.index);
    const Eigen::VectorXd r = x.row(row).transpose() - a.target;
    const double norm = r.norm();
    if (norm > 0.0) g.row(row) += (field.attractor_gain * std::exp(norm) / norm) * r.transpose();
  }
  for (Eigen::Index i = 0; i + 1 < x.rows(); ++i) {
    const Eigen::RowVectorXd d = field.spring * (x.row(i) - x.row(i + 1));
    g.row(i) += d;
    g.row(i + 1) -= d;
  }
  for (const auto& d : field.demos) {
    const double sign = d.label == Label::Successful ? 1.0 : -1.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double sigma = d.spreads[static_cast<std::size_t>(i)];
      const Eigen::VectorXd r = x.row(i).transpose() - d.centers.row(i).transpose();
      const double dens = isotropic_density(x.row(i).transpose(), d.centers.row(i).transpose(), sigma);
      // d(-S)/dx = sign * N * r / sigma^2
      g.row(i) += (field.density_weight * sign * dens / (sigma * sigma)) * r.transpose();
    }
  }
  return g;
}

}  // namespace dualdemo
