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
#include <vector>

#include <Eigen/Dense>

namespace dualdemo {

/// Symmetric band matrix holding the lower triangle: entry (i, j), i >= j,
/// i - j <= bandwidth, is stored at band_[(i - j) * size + j].
class BandMatrix {
 public:
  BandMatrix() = default;
  BandMatrix(std::size_t size, std::size_t bandwidth)
      : size_(size), bandwidth_(bandwidth), band_((bandwidth + 1) * size, 0.0) {}

  std::size_t size() const noexcept { return size_; }
  std::size_t bandwidth() const noexcept { return bandwidth_; }

  /// Symmetric access; entries outside the band read as zero.
  double operator()(std::size_t i, std::size_t j) const noexcept {
    if (i < j) std::swap(i, j);
    if (i - j > bandwidth_) return 0.0;
    return band_[(i - j) * size_ + j];
  }

  /// Adds to (i, j) and, implicitly, (j, i). Off-diagonal entries must be
  /// added once per symmetric pair.
  void add(std::size_t i, std::size_t j, double value) {
    if (i < j) std::swap(i, j);
    band_[(i - j) * size_ + j] += value;
  }

  /// this += alpha * other; both must share size and bandwidth.
  void axpy(double alpha, const BandMatrix& other);

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd to_dense() const;

 private:
  friend class BandCholesky;
  std::size_t size_ = 0;
  std::size_t bandwidth_ = 0;
  std::vector<double> band_;
};

/// Cholesky factorization that keeps the band. `ok()` is false when a pivot
/// is not positive, i.e. the matrix is not (numerically) positive definite.
class BandCholesky {
 public:
  explicit BandCholesky(const BandMatrix& a);

  bool ok() const noexcept { return ok_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  double& l(std::size_t i, std::size_t j) { return factor_.band_[(i - j) * factor_.size_ + j]; }
  double l(std::size_t i, std::size_t j) const { return factor_.band_[(i - j) * factor_.size_ + j]; }

  BandMatrix factor_;
  bool ok_ = false;
};

}  // namespace dualdemo
