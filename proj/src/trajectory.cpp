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

#include "dualdemo/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "dualdemo/error.hpp"

namespace dualdemo {

Trajectory::Trajectory(Points points) : points_(std::move(points)) {
  require(points_.rows() >= 2, ErrorCode::InvalidArgument,
          "trajectory needs at least 2 samples, got " + std::to_string(points_.rows()));
  require(points_.cols() >= 1, ErrorCode::InvalidArgument, "trajectory dimension must be >= 1");
  require(points_.allFinite(), ErrorCode::InvalidArgument, "trajectory contains non-finite values");
}

Trajectory Trajectory::from_rows(const std::vector<std::vector<double>>& rows) {
  require(!rows.empty(), ErrorCode::InvalidArgument, "trajectory has no samples");
  const std::size_t dim = rows.front().size();
  Points pts(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].size() == dim, ErrorCode::InvalidArgument,
            "ragged trajectory: row " + std::to_string(i) + " has " +
                std::to_string(rows[i].size()) + " values, expected " + std::to_string(dim));
    for (std::size_t d = 0; d < dim; ++d) pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rows[i][d];
  }
  return Trajectory(std::move(pts));
}

Trajectory Trajectory::from_flat(std::span<const double> flat, std::size_t length, std::size_t dim) {
  require(flat.size() == length * dim, ErrorCode::InvalidArgument, "flat buffer size does not match length * dim");
  Points pts(static_cast<Eigen::Index>(length), static_cast<Eigen::Index>(dim));
  std::copy(flat.begin(), flat.end(), pts.data());
  return Trajectory(std::move(pts));
}

std::vector<double> time_stamps(std::size_t length) {
  require(length >= 2, ErrorCode::InvalidArgument, "time vector needs at least 2 stamps");
  std::vector<double> t(length);
  for (std::size_t i = 0; i < length; ++i) t[i] = static_cast<double>(i) / static_cast<double>(length - 1);
  return t;
}

std::string_view to_string(Label label) noexcept {
  return label == Label::Successful ? "success" : "failure";
}

std::optional<Label> parse_label(std::string_view text) noexcept {
  if (text == "success" || text == "successful") return Label::Successful;
  if (text == "failure" || text == "failed") return Label::Failed;
  return std::nullopt;
}

std::optional<std::size_t> DemonstrationSet::dim() const noexcept {
  if (!successes_.empty()) return successes_.front().trajectory.dim();
  if (!failures_.empty()) return failures_.front().trajectory.dim();
  return std::nullopt;
}

void DemonstrationSet::add(Demonstration demo) {
  require(!demo.id.empty(), ErrorCode::InvalidArgument, "demonstration id must not be empty");
  require(find(demo.id) == nullptr, ErrorCode::Conflict, "duplicate demonstration id '" + demo.id + "'");
  if (auto d = dim()) {
    require(*d == demo.trajectory.dim(), ErrorCode::InvalidArgument,
            "demonstration '" + demo.id + "' has dimension " + std::to_string(demo.trajectory.dim()) +
                ", set has " + std::to_string(*d));
  }
  auto& bucket = demo.label == Label::Successful ? successes_ : failures_;
  bucket.push_back(std::move(demo));
}

bool DemonstrationSet::remove(std::string_view id) {
  for (auto* bucket : {&successes_, &failures_}) {
    auto it = std::find_if(bucket->begin(), bucket->end(), [&](const Demonstration& d) { return d.id == id; });
    if (it != bucket->end()) {
      bucket->erase(it);
      return true;
    }
  }
  return false;
}

bool DemonstrationSet::relabel(std::string_view id, Label label) {
  for (auto* bucket : {&successes_, &failures_}) {
    auto it = std::find_if(bucket->begin(), bucket->end(), [&](const Demonstration& d) { return d.id == id; });
    if (it == bucket->end()) continue;
    if (it->label == label) return true;
    Demonstration moved = std::move(*it);
    bucket->erase(it);
    moved.label = label;
    (label == Label::Successful ? successes_ : failures_).push_back(std::move(moved));
    return true;
  }
  return false;
}

const Demonstration* DemonstrationSet::find(std::string_view id) const {
  for (const auto* bucket : {&successes_, &failures_}) {
    for (const auto& d : *bucket)
      if (d.id == id) return &d;
  }
  return nullptr;
}

std::vector<Trajectory> DemonstrationSet::trajectories(Label label) const {
  const auto& bucket = label == Label::Successful ? successes_ : failures_;
  std::vector<Trajectory> out;
  out.reserve(bucket.size());
  for (const auto& d : bucket) out.push_back(d.trajectory);
  return out;
}

std::string_view to_string(CoordinateFrame frame) noexcept {
  switch (frame) {
    case CoordinateFrame::Cartesian: return "cartesian";
    case CoordinateFrame::Tangent: return "tangent";
    case CoordinateFrame::Laplacian: return "laplacian";
  }
  return "unknown";
}

std::size_t min_length(CoordinateFrame frame) noexcept {
  return frame == CoordinateFrame::Laplacian ? 3 : 2;
}

std::vector<StencilRow> frame_stencil(CoordinateFrame frame, std::size_t length) {
  require(length >= min_length(frame), ErrorCode::InvalidArgument,
          std::string(to_string(frame)) + " frame needs at least " + std::to_string(min_length(frame)) +
              " samples, got " + std::to_string(length));
  std::vector<StencilRow> rows(length);
  const std::size_t last = length - 1;
  auto put = [](StencilRow& r, std::size_t col, double c) {
    r.cols[r.count] = col;
    r.coeffs[r.count] = c;
    ++r.count;
  };
  for (std::size_t i = 0; i < length; ++i) {
    StencilRow& r = rows[i];
    switch (frame) {
      case CoordinateFrame::Cartesian:
        put(r, i, 1.0);
        break;
      case CoordinateFrame::Tangent:
        // -1 on the diagonal, +1 above it; the last row keeps only -1.
        put(r, i, -1.0);
        if (i < last) put(r, i + 1, 1.0);
        break;
      case CoordinateFrame::Laplacian:
        // Half second difference; boundary rows are (2, -2) / 2 and (-2, 2) / 2.
        if (i == 0) {
          put(r, 0, 1.0);
          put(r, 1, -1.0);
        } else if (i == last) {
          put(r, last - 1, -1.0);
          put(r, last, 1.0);
        } else {
          put(r, i - 1, -0.5);
          put(r, i, 1.0);
          put(r, i + 1, -0.5);
        }
        break;
    }
  }
  return rows;
}

Trajectory resample(const Trajectory& traj, std::size_t target_len) {
  require(target_len >= 2, ErrorCode::InvalidArgument, "resample target length must be >= 2");
  const auto& src = traj.points();
  const std::size_t len = traj.length();
  Points out(static_cast<Eigen::Index>(target_len), src.cols());
  const double scale = static_cast<double>(len - 1);
  const double denom = static_cast<double>(target_len - 1);
  for (std::size_t j = 0; j < target_len; ++j) {
    // j * (len - 1) is an exact integer product, so matched lengths give exact
    // indices and zero fractions.
    const double s = static_cast<double>(j) * scale / denom;
    std::size_t idx = static_cast<std::size_t>(std::floor(s));
    if (idx >= len - 1) idx = len - 2;
    const double frac = s - static_cast<double>(idx);
    const auto row = static_cast<Eigen::Index>(j);
    const auto i0 = static_cast<Eigen::Index>(idx);
    out.row(row) = src.row(i0) + frac * (src.row(i0 + 1) - src.row(i0));
  }
  out.row(0) = src.row(0);
  out.row(static_cast<Eigen::Index>(target_len - 1)) = src.row(static_cast<Eigen::Index>(len - 1));
  return Trajectory(std::move(out));
}

DemonstrationSet align_set(const DemonstrationSet& set, std::size_t target_len) {
  require(!set.empty(), ErrorCode::InvalidArgument, "cannot align an empty demonstration set");
  DemonstrationSet out;
  for (const auto* bucket : {&set.successes(), &set.failures()}) {
    for (const auto& d : *bucket) out.add({d.id, resample(d.trajectory, target_len), d.label});
  }
  return out;
}

Trajectory smooth(const Trajectory& traj, std::size_t window) {
  require(window % 2 == 1, ErrorCode::InvalidArgument, "smoothing window must be odd");
  require(window <= traj.length(), ErrorCode::InvalidArgument, "smoothing window exceeds trajectory length");
  const auto& src = traj.points();
  const std::size_t len = traj.length();
  const std::size_t half = window / 2;
  Points out(src.rows(), src.cols());
  for (std::size_t i = 0; i < len; ++i) {
    const std::size_t h = std::min({half, i, len - 1 - i});
    const auto first = static_cast<Eigen::Index>(i - h);
    const auto count = static_cast<Eigen::Index>(2 * h + 1);
    out.row(static_cast<Eigen::Index>(i)) = src.middleRows(first, count).colwise().sum() / static_cast<double>(count);
  }
  out.row(0) = src.row(0);
  out.row(static_cast<Eigen::Index>(len - 1)) = src.row(static_cast<Eigen::Index>(len - 1));
  return Trajectory(std::move(out));
}

Points apply_frame(const Points& points, CoordinateFrame frame) {
  if (frame == CoordinateFrame::Cartesian) return points;
  const auto stencil = frame_stencil(frame, static_cast<std::size_t>(points.rows()));
  Points out = Points::Zero(points.rows(), points.cols());
  for (std::size_t i = 0; i < stencil.size(); ++i) {
    const auto& r = stencil[i];
    for (std::size_t k = 0; k < r.count; ++k)
      out.row(static_cast<Eigen::Index>(i)) += r.coeffs[k] * points.row(static_cast<Eigen::Index>(r.cols[k]));
  }
  return out;
}

Points apply_frame_transpose(const Points& points, CoordinateFrame frame) {
  if (frame == CoordinateFrame::Cartesian) return points;
  const auto stencil = frame_stencil(frame, static_cast<std::size_t>(points.rows()));
  Points out = Points::Zero(points.rows(), points.cols());
  for (std::size_t i = 0; i < stencil.size(); ++i) {
    const auto& r = stencil[i];
    for (std::size_t k = 0; k < r.count; ++k)
      out.row(static_cast<Eigen::Index>(r.cols[k])) += r.coeffs[k] * points.row(static_cast<Eigen::Index>(i));
  }
  return out;
}

Trajectory to_frame(const Trajectory& traj, CoordinateFrame frame) {
  if (frame == CoordinateFrame::Cartesian) return traj;
  return Trajectory(apply_frame(traj.points(), frame));
}

}  // namespace dualdemo
