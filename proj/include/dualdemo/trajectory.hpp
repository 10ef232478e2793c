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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace dualdemo {

/// Row-major so that the flat buffer is time-major: sample t, coordinate d
/// lives at index t * dim + d.
using Points = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Ordered, fixed-length sequence of n-dimensional task-space samples.
/// Sample i sits at normalized time i / (T - 1).
class Trajectory {
 public:
  /// Throws InvalidArgument unless T >= 2, n >= 1 and every value is finite.
  explicit Trajectory(Points points);

  static Trajectory from_rows(const std::vector<std::vector<double>>& rows);
  static Trajectory from_flat(std::span<const double> flat, std::size_t length, std::size_t dim);

  std::size_t length() const noexcept { return static_cast<std::size_t>(points_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(points_.cols()); }
  const Points& points() const noexcept { return points_; }
  Eigen::VectorXd point(std::size_t i) const { return points_.row(static_cast<Eigen::Index>(i)).transpose(); }

  /// Time-major flattened view of the samples.
  Eigen::Map<const Eigen::VectorXd> flat() const {
    return {points_.data(), points_.size()};
  }

  double time(std::size_t i) const noexcept {
    return static_cast<double>(i) / static_cast<double>(length() - 1);
  }

  friend bool operator==(const Trajectory& a, const Trajectory& b) {
    return a.points_.rows() == b.points_.rows() && a.points_.cols() == b.points_.cols() &&
           a.points_ == b.points_;
  }

 private:
  Points points_;
};

/// Uniform time stamps t_i = i / (T - 1).
std::vector<double> time_stamps(std::size_t length);

enum class Label { Successful, Failed };

std::string_view to_string(Label label) noexcept;
/// Accepts "success"/"successful" and "failure"/"failed".
std::optional<Label> parse_label(std::string_view text) noexcept;

struct Demonstration {
  std::string id;
  Trajectory trajectory;
  Label label;
};

/// Labeled pair of demonstration subsets.
class DemonstrationSet {
 public:
  const std::vector<Demonstration>& successes() const noexcept { return successes_; }
  const std::vector<Demonstration>& failures() const noexcept { return failures_; }

  std::size_t size() const noexcept { return successes_.size() + failures_.size(); }
  bool empty() const noexcept { return size() == 0; }
  /// Dimension shared by every member; nullopt when empty.
  std::optional<std::size_t> dim() const noexcept;

  /// Routes by label. Rejects duplicate ids and dimension mismatches.
  void add(Demonstration demo);
  /// Returns false when the id is unknown.
  bool remove(std::string_view id);
  /// Moves the demonstration to the other subset when the label changes.
  /// Returns false when the id is unknown.
  bool relabel(std::string_view id, Label label);
  const Demonstration* find(std::string_view id) const;

  std::vector<Trajectory> trajectories(Label label) const;

 private:
  std::vector<Demonstration> successes_;
  std::vector<Demonstration> failures_;
};

enum class CoordinateFrame { Cartesian, Tangent, Laplacian };

std::string_view to_string(CoordinateFrame frame) noexcept;

/// One row of a banded frame matrix: up to three (column, coefficient) taps.
struct StencilRow {
  std::size_t count = 0;
  std::size_t cols[3] = {0, 0, 0};
  double coeffs[3] = {0.0, 0.0, 0.0};
};

/// Row-wise description of the T x T frame matrix (identity, tangent G or
/// Laplacian L). Never materialized densely.
std::vector<StencilRow> frame_stencil(CoordinateFrame frame, std::size_t length);

/// Minimum trajectory length a frame is defined for.
std::size_t min_length(CoordinateFrame frame) noexcept;

/// Piecewise-linear, uniform-in-index resampling. Endpoints are copied exactly.
Trajectory resample(const Trajectory& traj, std::size_t target_len);

/// Resamples every member to `target_len`, preserving ids and labels.
DemonstrationSet align_set(const DemonstrationSet& set, std::size_t target_len);

/// Centered moving average; the window shrinks symmetrically near the ends so
/// that the endpoints are unchanged. `window` must be odd and <= T.
Trajectory smooth(const Trajectory& traj, std::size_t window);

/// Applies the frame matrix to every coordinate column.
Trajectory to_frame(const Trajectory& traj, CoordinateFrame frame);

/// Same as to_frame on raw samples; also used for gradients.
Points apply_frame(const Points& points, CoordinateFrame frame);
/// Applies the transposed frame matrix (M^T Y), column by column.
Points apply_frame_transpose(const Points& points, CoordinateFrame frame);

}  // namespace dualdemo
