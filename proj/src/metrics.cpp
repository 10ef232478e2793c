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

#include "dualdemo/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dualdemo/error.hpp"

namespace dualdemo {

namespace {

void check_pair(const Trajectory& a, const Trajectory& b) {
  require(a.length() == b.length(), ErrorCode::InvalidArgument,
          "trajectory lengths differ: " + std::to_string(a.length()) + " vs " + std::to_string(b.length()));
  require(a.dim() == b.dim(), ErrorCode::InvalidArgument, "trajectory dimensions differ");
}

/// Triangle area, independent of vertex order: vertices are sorted
/// lexicographically first so that the same triangle always rounds the same.
double triangle_area(Eigen::VectorXd p, Eigen::VectorXd q, Eigen::VectorXd r) {
  std::array<Eigen::VectorXd*, 3> v = {&p, &q, &r};
  std::sort(v.begin(), v.end(), [](const Eigen::VectorXd* x, const Eigen::VectorXd* y) {
    return std::lexicographical_compare(x->data(), x->data() + x->size(), y->data(), y->data() + y->size());
  });
  const Eigen::VectorXd u = *v[1] - *v[0];
  const Eigen::VectorXd w = *v[2] - *v[0];
  if (u.size() == 2) return 0.5 * std::abs(u(0) * w(1) - u(1) * w(0));
  const Eigen::Vector3d c = Eigen::Vector3d(u(0), u(1), u(2)).cross(Eigen::Vector3d(w(0), w(1), w(2)));
  return 0.5 * c.norm();
}

}  // namespace

double sse(const Trajectory& a, const Trajectory& b) {
  check_pair(a, b);
  return (a.points() - b.points()).squaredNorm();
}

double sea(const Trajectory& a, const Trajectory& b) {
  check_pair(a, b);
  require(a.dim() == 2 || a.dim() == 3, ErrorCode::InvalidArgument,
          "swept error area supports 2D and 3D trajectories, got dimension " + std::to_string(a.dim()));
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < a.length(); ++t) {
    const Eigen::VectorXd a0 = a.point(t), a1 = a.point(t + 1), b0 = b.point(t), b1 = b.point(t + 1);
    // Split along (a_t, b_t+1) and along (a_t+1, b_t). Swapping a and b maps
    // each triangle onto one of the other split, so the sum is symmetric.
    const double first = triangle_area(a0, a1, b1) + triangle_area(a0, b1, b0);
    const double second = triangle_area(a0, a1, b0) + triangle_area(a1, b1, b0);
    total += 0.5 * (first + second);
  }
  return total;
}

std::vector<double> menger_curvature(const Trajectory& traj) {
  require(traj.length() >= 3, ErrorCode::InvalidArgument, "curvature needs at least 3 samples");
  const std::size_t len = traj.length();
  std::vector<double> k(len, 0.0);
  for (std::size_t i = 1; i + 1 < len; ++i) {
    const Eigen::VectorXd u = traj.point(i) - traj.point(i - 1);
    const Eigen::VectorXd v = traj.point(i + 1) - traj.point(i);
    const Eigen::VectorXd w = traj.point(i + 1) - traj.point(i - 1);
    const double uu = u.squaredNorm(), vv = v.squaredNorm(), ww = w.squaredNorm();
    const double uv = u.dot(v);
    // Twice the triangle area from the Gram determinant.
    const double area2 = std::sqrt(std::max(0.0, uu * vv - uv * uv));
    const double denom = std::sqrt(uu * vv * ww);
    k[i] = denom > 0.0 ? 2.0 * area2 / denom : 0.0;
  }
  k.front() = k[1];
  k.back() = k[len - 2];
  return k;
}

double crv(const Trajectory& a, const Trajectory& b) {
  check_pair(a, b);
  const auto ka = menger_curvature(a);
  const auto kb = menger_curvature(b);
  double sum = 0.0;
  for (std::size_t i = 0; i < ka.size(); ++i) sum += (ka[i] - kb[i]) * (ka[i] - kb[i]);
  return sum;
}

MetricReport compare(const Trajectory& a, const Trajectory& b) { return {sse(a, b), sea(a, b), crv(a, b)}; }

}  // namespace dualdemo
