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

#include "dualdemo/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "dualdemo/error.hpp"
#include "dualdemo/random.hpp"

namespace dualdemo {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

struct Factored {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double log_norm = 0.0;  // -0.5 (D log 2pi + log det)
};

Factored factor(const Eigen::MatrixXd& cov) {
  Factored f;
  f.llt.compute(cov);
  require(f.llt.info() == Eigen::Success, ErrorCode::Numeric, "covariance is not positive definite");
  const Eigen::MatrixXd l = f.llt.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  f.log_norm = -0.5 * (static_cast<double>(cov.rows()) * kLog2Pi + log_det);
  return f;
}

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

/// Joint covariance floor: Sigma_tt is kept >= floor and the spatial block is
/// lifted so that the conditional covariance x | t has eigenvalues >= floor.
void floor_covariance(Eigen::MatrixXd& cov, double floor) {
  cov = 0.5 * (cov + cov.transpose()).eval();
  if (cov(0, 0) < floor) cov(0, 0) += floor;
  const auto n = cov.rows() - 1;
  const Eigen::VectorXd xt = cov.col(0).tail(n);
  const Eigen::MatrixXd schur = cov.bottomRightCorner(n, n) - xt * xt.transpose() / cov(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(schur, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < floor) cov.bottomRightCorner(n, n).diagonal().array() += floor;
}

double data_floor(const Eigen::MatrixXd& rows, double floor_scale) {
  const auto n = rows.cols() - 1;
  const Eigen::MatrixXd x = rows.rightCols(n);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const double var = (x.rowwise() - mean).array().square().sum() / static_cast<double>(x.rows() * n);
  return std::max(floor_scale * var, 1e-12);
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& rows, const std::vector<Eigen::Index>& members,
                                  const Eigen::VectorXd& mean) {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(rows.cols(), rows.cols());
  for (auto i : members) {
    const Eigen::VectorXd d = rows.row(i).transpose() - mean;
    cov.noalias() += d * d.transpose();
  }
  return cov / static_cast<double>(members.size());
}

struct Params {
  std::vector<double> priors;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covs;
};

Params kmeans_init(const Eigen::MatrixXd& rows, int k, double floor, Rng& rng) {
  const Eigen::Index s = rows.rows();
  const Eigen::Index dim = rows.cols();
  Eigen::RowVectorXd scale = ((rows.rowwise() - rows.colwise().mean()).array().square().colwise().sum() /
                              static_cast<double>(s))
                                 .sqrt();
  for (Eigen::Index j = 0; j < dim; ++j)
    if (!(scale(j) > 0.0)) scale(j) = 1.0;
  const Eigen::MatrixXd z = rows.array().rowwise() / scale.array();

  // k-means++ seeding.
  std::vector<Eigen::RowVectorXd> centers;
  centers.push_back(z.row(static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(s)))));
  Eigen::VectorXd d2 = (z.rowwise() - centers[0]).rowwise().squaredNorm();
  while (static_cast<int>(centers.size()) < k) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total <= 0.0) {
      pick = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(s)));
    } else {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = s - 1;
      for (Eigen::Index i = 0; i < s; ++i) {
        acc += d2(i);
        if (acc > target) {
          pick = i;
          break;
        }
      }
    }
    centers.push_back(z.row(pick));
    d2 = d2.cwiseMin((z.rowwise() - centers.back()).rowwise().squaredNorm());
  }

  // A few Lloyd iterations.
  std::vector<int> assign(static_cast<std::size_t>(s), 0);
  for (int iter = 0; iter < 20; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < s; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (z.row(i) - centers[static_cast<std::size_t>(c)]).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[static_cast<std::size_t>(i)] != best) changed = true;
      assign[static_cast<std::size_t>(i)] = best;
    }
    for (int c = 0; c < k; ++c) {
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(dim);
      int count = 0;
      for (Eigen::Index i = 0; i < s; ++i) {
        if (assign[static_cast<std::size_t>(i)] == c) {
          sum += z.row(i);
          ++count;
        }
      }
      if (count > 0) centers[static_cast<std::size_t>(c)] = sum / count;
    }
    if (!changed && iter > 0) break;
  }

  const Eigen::VectorXd global_mean = rows.colwise().mean().transpose();
  std::vector<Eigen::Index> everyone(static_cast<std::size_t>(s));
  for (Eigen::Index i = 0; i < s; ++i) everyone[static_cast<std::size_t>(i)] = i;
  const Eigen::MatrixXd global_cov = sample_covariance(rows, everyone, global_mean);

  Params p;
  for (int c = 0; c < k; ++c) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < s; ++i)
      if (assign[static_cast<std::size_t>(i)] == c) members.push_back(i);
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    if (static_cast<Eigen::Index>(members.size()) >= dim + 1) {
      mean = Eigen::VectorXd::Zero(dim);
      for (auto i : members) mean += rows.row(i).transpose();
      mean /= static_cast<double>(members.size());
      cov = sample_covariance(rows, members, mean);
    } else {
      mean = (centers[static_cast<std::size_t>(c)].array() * scale.array()).transpose();
      cov = global_cov / static_cast<double>(k);
    }
    floor_covariance(cov, floor);
    p.priors.push_back(std::max(static_cast<double>(members.size()), 1.0));
    p.means.push_back(std::move(mean));
    p.covs.push_back(std::move(cov));
  }
  double total = 0.0;
  for (double w : p.priors) total += w;
  for (double& w : p.priors) w /= total;
  return p;
}

/// Fills responsibilities and returns the log-likelihood.
double e_step(const Eigen::MatrixXd& rows, const Params& p, Eigen::MatrixXd& resp) {
  const auto k = static_cast<Eigen::Index>(p.priors.size());
  Eigen::MatrixXd lp(rows.rows(), k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    const Factored f = factor(p.covs[cu]);
    Eigen::MatrixXd centered = (rows.rowwise() - p.means[cu].transpose()).transpose();
    f.llt.matrixL().solveInPlace(centered);
    lp.col(c) = (std::log(p.priors[cu]) + f.log_norm) - 0.5 * centered.colwise().squaredNorm().transpose().array();
  }
  resp.resize(rows.rows(), k);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double lse = log_sum_exp(lp.row(i).transpose());
    ll += lse;
    resp.row(i) = (lp.row(i).array() - lse).exp();
  }
  return ll;
}

/// Returns false when a component's effective sample count drops below dim + 1.
bool m_step(const Eigen::MatrixXd& rows, const Eigen::MatrixXd& resp, double floor, Params& p) {
  const Eigen::Index k = resp.cols();
  const Eigen::Index dim = rows.cols();
  const auto s = static_cast<double>(rows.rows());
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    const double nk = resp.col(c).sum();
    if (!(nk >= static_cast<double>(dim + 1))) return false;
    Eigen::VectorXd mean = rows.transpose() * resp.col(c) / nk;
    const Eigen::MatrixXd centered = rows.rowwise() - mean.transpose();
    Eigen::MatrixXd cov = centered.transpose() * (centered.array().colwise() * resp.col(c).array()).matrix() / nk;
    floor_covariance(cov, floor);
    p.priors[cu] = nk / s;
    p.means[cu] = std::move(mean);
    p.covs[cu] = std::move(cov);
  }
  double total = 0.0;
  for (double w : p.priors) total += w;
  for (double& w : p.priors) w /= total;
  return true;
}

struct RunResult {
  Params params;
  std::vector<double> trace;
};

std::optional<RunResult> run_em(const Eigen::MatrixXd& rows, int k, double floor, const FitConfig& cfg, Rng& rng) {
  RunResult r;
  r.params = kmeans_init(rows, k, floor, rng);
  Eigen::MatrixXd resp;
  double prev = e_step(rows, r.params, resp);
  r.trace.push_back(prev);
  for (int it = 0; it < cfg.max_em_iters; ++it) {
    if (!m_step(rows, resp, floor, r.params)) return std::nullopt;
    const double ll = e_step(rows, r.params, resp);
    if (!std::isfinite(ll)) return std::nullopt;
    r.trace.push_back(ll);
    if (std::abs(ll - prev) <= cfg.tolerance * std::max(1.0, std::abs(prev))) break;
    prev = ll;
  }
  return r;
}

}  // namespace

Eigen::MatrixXd GaussianComponent::conditional_covariance() const {
  const Eigen::VectorXd xt = cov_xt();
  return cov_xx() - xt * xt.transpose() / cov_tt();
}

MixtureModel::MixtureModel(std::vector<GaussianComponent> components, double floor, double t_min, double t_max)
    : components_(std::move(components)), floor_(floor), t_min_(t_min), t_max_(t_max) {
  require(!components_.empty(), ErrorCode::InvalidArgument, "mixture needs at least one component");
  require(floor_ > 0.0, ErrorCode::InvalidArgument, "covariance floor must be positive");
  const auto dim = components_.front().mean.size();
  require(dim >= 2, ErrorCode::InvalidArgument, "mixture mean must hold time plus at least one coordinate");
  double total = 0.0;
  for (const auto& c : components_) {
    require(c.mean.size() == dim && c.covariance.rows() == dim && c.covariance.cols() == dim,
            ErrorCode::InvalidArgument, "mixture component shapes disagree");
    require(c.prior > 0.0 && c.prior <= 1.0, ErrorCode::InvalidArgument, "component prior outside (0, 1]");
    require(c.mean.allFinite() && c.covariance.allFinite(), ErrorCode::InvalidArgument,
            "mixture component has non-finite values");
    require((c.covariance - c.covariance.transpose()).cwiseAbs().maxCoeff() <=
                1e-12 * std::max(1.0, c.covariance.cwiseAbs().maxCoeff()),
            ErrorCode::InvalidArgument, "component covariance is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(c.covariance);
    require(llt.info() == Eigen::Success, ErrorCode::InvalidArgument,
            "component covariance is not positive definite");
    total += c.prior;
  }
  require(std::abs(total - 1.0) <= 1e-9, ErrorCode::InvalidArgument, "component priors do not sum to 1");
}

double MixtureModel::log_likelihood(const Eigen::MatrixXd& rows) const {
  Params p;
  for (const auto& c : components_) {
    p.priors.push_back(c.prior);
    p.means.push_back(c.mean);
    p.covs.push_back(c.covariance);
  }
  Eigen::MatrixXd resp;
  return e_step(rows, p, resp);
}

std::size_t MixtureModel::parameter_count() const noexcept {
  const std::size_t k = components_.size();
  const std::size_t d = dim() + 1;
  return (k - 1) + k * d + k * d * (d + 1) / 2;
}

Eigen::MatrixXd stack_time_space(const std::vector<Trajectory>& demos) {
  require(!demos.empty(), ErrorCode::InsufficientData, "no demonstrations to fit");
  const std::size_t len = demos.front().length();
  const std::size_t dim = demos.front().dim();
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(demos.size() * len), static_cast<Eigen::Index>(dim + 1));
  Eigen::Index r = 0;
  for (const auto& d : demos) {
    require(d.length() == len && d.dim() == dim, ErrorCode::InvalidArgument,
            "demonstrations must share length and dimension before fitting");
    for (std::size_t i = 0; i < len; ++i, ++r) {
      rows(r, 0) = d.time(i);
      rows.row(r).tail(static_cast<Eigen::Index>(dim)) = d.points().row(static_cast<Eigen::Index>(i));
    }
  }
  return rows;
}

MixtureModel fit_em(const std::vector<Trajectory>& demos, int k, const FitConfig& cfg, EmTrace* trace) {
  require(k >= 1, ErrorCode::InvalidArgument, "component count must be >= 1");
  require(cfg.restarts >= 1, ErrorCode::InvalidArgument, "restarts must be >= 1");
  require(cfg.floor_scale > 0.0, ErrorCode::InvalidArgument, "floor scale must be positive");
  const Eigen::MatrixXd rows = stack_time_space(demos);
  const auto dim = static_cast<std::size_t>(rows.cols() - 1);
  require(static_cast<std::size_t>(rows.rows()) >= static_cast<std::size_t>(k) * (dim + 2),
          ErrorCode::InsufficientData,
          "insufficient data: " + std::to_string(rows.rows()) + " samples for k = " + std::to_string(k));
  const double floor = data_floor(rows, cfg.floor_scale);

  std::optional<RunResult> best;
  std::vector<double> finals;
  for (int r = 0; r < cfg.restarts; ++r) {
    Rng rng(Rng::derive(cfg.seed, static_cast<std::uint64_t>(k) * 1000003ULL + static_cast<std::uint64_t>(r)));
    auto run = run_em(rows, k, floor, cfg, rng);
    finals.push_back(run ? run->trace.back() : std::numeric_limits<double>::quiet_NaN());
    if (run && (!best || run->trace.back() > best->trace.back())) best = std::move(run);
  }
  require(best.has_value(), ErrorCode::DegenerateFit,
          "every EM restart collapsed a component for k = " + std::to_string(k));

  std::vector<GaussianComponent> comps;
  for (std::size_t c = 0; c < best->params.priors.size(); ++c)
    comps.push_back({best->params.priors[c], best->params.means[c], best->params.covs[c]});
  if (trace) {
    trace->log_likelihood = best->trace;
    trace->restart_log_likelihood = finals;
  }
  return MixtureModel(std::move(comps), floor, rows.col(0).minCoeff(), rows.col(0).maxCoeff());
}

double bic_score(double log_likelihood, std::size_t parameters, std::size_t samples) {
  return -2.0 * log_likelihood + static_cast<double>(parameters) * std::log(static_cast<double>(samples));
}

MixtureModel select_k_bic(const std::vector<Trajectory>& demos, const FitConfig& cfg, std::vector<BicEntry>* table) {
  require(cfg.k_min >= 1 && cfg.k_max >= cfg.k_min, ErrorCode::InvalidArgument, "invalid k range");
  const Eigen::MatrixXd rows = stack_time_space(demos);
  const auto samples = static_cast<std::size_t>(rows.rows());
  std::optional<MixtureModel> best;
  double best_bic = std::numeric_limits<double>::infinity();
  std::string last_error;
  if (table) table->clear();
  for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
    BicEntry entry;
    entry.k = k;
    try {
      MixtureModel m = fit_em(demos, k, cfg);
      entry.ok = true;
      entry.log_likelihood = m.log_likelihood(rows);
      entry.parameters = m.parameter_count();
      entry.bic = bic_score(entry.log_likelihood, entry.parameters, samples);
      if (entry.bic < best_bic) {
        best_bic = entry.bic;
        best = std::move(m);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateFit && e.code() != ErrorCode::InsufficientData) throw;
      last_error = e.what();
    }
    if (table) table->push_back(entry);
  }
  require(best.has_value(), ErrorCode::DegenerateFit, "no k in range produced a fit: " + last_error);
  return std::move(*best);
}

RegressedPath gmr(const MixtureModel& model, const std::vector<double>& time) {
  require(!time.empty(), ErrorCode::InvalidArgument, "gmr needs at least one time stamp");
  const std::size_t n = model.dim();
  const auto& comps = model.components();
  const std::size_t k = comps.size();

  // Per-component conditional slope, offset covariance and marginal in t.
  std::vector<Eigen::VectorXd> slope(k), mean_x(k);
  std::vector<Eigen::MatrixXd> cond(k);
  std::vector<double> log_norm_t(k);
  for (std::size_t c = 0; c < k; ++c) {
    const double tt = comps[c].cov_tt();
    require(tt >= model.floor() * (1.0 - 1e-12), ErrorCode::Numeric, "Sigma_tt below the covariance floor");
    slope[c] = comps[c].cov_xt() / tt;
    mean_x[c] = comps[c].mean_x();
    cond[c] = comps[c].conditional_covariance();
    log_norm_t[c] = std::log(comps[c].prior) - 0.5 * (kLog2Pi + std::log(tt));
  }

  RegressedPath out;
  out.time = time;
  out.means = Points::Zero(static_cast<Eigen::Index>(time.size()), static_cast<Eigen::Index>(n));
  out.covariances.reserve(time.size());
  Eigen::VectorXd lp(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < time.size(); ++i) {
    const double t = time[i];
    if (t < model.t_min() || t > model.t_max()) out.extrapolated = true;
    for (std::size_t c = 0; c < k; ++c) {
      const double d = t - comps[c].mean_t();
      lp(static_cast<Eigen::Index>(c)) = log_norm_t[c] - 0.5 * d * d / comps[c].cov_tt();
    }
    const double lse = log_sum_exp(lp);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t c = 0; c < k; ++c) {
      const double beta = std::exp(lp(static_cast<Eigen::Index>(c)) - lse);
      m += beta * (mean_x[c] + slope[c] * (t - comps[c].mean_t()));
      cov += beta * beta * cond[c];
    }
    cov = 0.5 * (cov + cov.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < model.floor()) cov.diagonal().array() += model.floor();
    out.means.row(static_cast<Eigen::Index>(i)) = m.transpose();
    out.covariances.push_back(std::move(cov));
  }
  return out;
}

}  // namespace dualdemo
