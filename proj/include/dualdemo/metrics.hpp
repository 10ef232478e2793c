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

#include <vector>

#include "dualdemo/trajectory.hpp"

namespace dualdemo {

struct MetricReport {
  double sse = 0.0;
  double sea = 0.0;
  double crv = 0.0;
};

/// Sum over t of ||a_t - b_t||^2.
double sse(const Trajectory& a, const Trajectory& b);

/// Swept error area: for each cell t, the area of the quadrilateral
/// (a_t, a_t+1, b_t+1, b_t), taken as the mean of its two triangulations.
/// Defined for n = 2 and n = 3.
double sea(const Trajectory& a, const Trajectory& b);

/// Unsigned discrete curvature at every sample from the circle through each
/// consecutive triple; the endpoints copy their neighbor. Collinear triples
/// give 0.
std::vector<double> menger_curvature(const Trajectory& traj);

/// SSE between the curvature sequences of a and b. Needs T >= 3.
double crv(const Trajectory& a, const Trajectory& b);

MetricReport compare(const Trajectory& a, const Trajectory& b);

}  // namespace dualdemo
