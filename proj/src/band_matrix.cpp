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

#include "dualdemo/band_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "dualdemo/error.hpp"

namespace dualdemo {

void BandMatrix::axpy(double alpha, const BandMatrix& other) {
  require(size_ == other.size_ && bandwidth_ == other.bandwidth_, ErrorCode::InvalidArgument,
          "band matrices differ in shape");
  for (std::size_t k = 0; k < band_.size(); ++k) band_[k] += alpha * other.band_[k];
}

Eigen::VectorXd BandMatrix::multiply(const Eigen::VectorXd& x) const {
  require(static_cast<std::size_t>(x.size()) == size_, ErrorCode::InvalidArgument, "band multiply size mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(x.size());
  for (std::size_t j = 0; j < size_; ++j) {
    const auto ju = static_cast<Eigen::Index>(j);
    y(ju) += band_[j] * x(ju);
    for (std::size_t off = 1; off <= bandwidth_ && j + off < size_; ++off) {
      const double v = band_[off * size_ + j];
      const auto iu = static_cast<Eigen::Index>(j + off);
      y(iu) += v * x(ju);
      y(ju) += v * x(iu);
    }
  }
  return y;
}

Eigen::MatrixXd BandMatrix::to_dense() const {
  const auto n = static_cast<Eigen::Index>(size_);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < size_; ++j) {
    for (std::size_t off = 0; off <= bandwidth_ && j + off < size_; ++off) {
      const double v = band_[off * size_ + j];
      d(static_cast<Eigen::Index>(j + off), static_cast<Eigen::Index>(j)) = v;
      d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j + off)) = v;
    }
  }
  return d;
}

BandCholesky::BandCholesky(const BandMatrix& a) : factor_(a) {
  const std::size_t n = a.size();
  const std::size_t kd = a.bandwidth();
  double scale = 0.0;
  for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(j, j)));
  const double tiny = 1e-13 * std::max(scale, 1e-300);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k0 = j > kd ? j - kd : 0;
    double d = l(j, j);
    for (std::size_t k = k0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > tiny) || !std::isfinite(d)) return;
    const double piv = std::sqrt(d);
    l(j, j) = piv;
    for (std::size_t i = j + 1; i < std::min(n, j + kd + 1); ++i) {
      const std::size_t ki = i > kd ? i - kd : 0;
      double v = l(i, j);
      for (std::size_t k = std::max(ki, k0); k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / piv;
    }
  }
  ok_ = true;
}

Eigen::VectorXd BandCholesky::solve(const Eigen::VectorXd& rhs) const {
  require(ok_, ErrorCode::Numeric, "solve on a failed band factorization");
  const std::size_t n = factor_.size();
  const std::size_t kd = factor_.bandwidth();
  require(static_cast<std::size_t>(rhs.size()) == n, ErrorCode::InvalidArgument, "band solve size mismatch");
  Eigen::VectorXd y = rhs;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k0 = i > kd ? i - kd : 0;
    double v = y(static_cast<Eigen::Index>(i));
    for (std::size_t k = k0; k < i; ++k) v -= l(i, k) * y(static_cast<Eigen::Index>(k));
    y(static_cast<Eigen::Index>(i)) = v / l(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double v = y(static_cast<Eigen::Index>(ii));
    for (std::size_t k = ii + 1; k < std::min(n, ii + kd + 1); ++k) v -= l(k, ii) * y(static_cast<Eigen::Index>(k));
    y(static_cast<Eigen::Index>(ii)) = v / l(ii, ii);
  }
  return y;
}

}  // namespace dualdemo
