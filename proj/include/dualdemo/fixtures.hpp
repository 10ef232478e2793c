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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dualdemo/objective.hpp"
#include "dualdemo/solver.hpp"
#include "dualdemo/trajectory.hpp"

namespace dualdemo {

/// Disk (2D) or ball (3D) used by automatic labelers. The solver never sees it.
struct Obstacle {
  Eigen::VectorXd center;
  double radius = 0.0;

  /// Smallest distance from the center to the polyline through the samples.
  double clearance(const Trajectory& traj) const;
  bool collides(const Trajectory& traj) const { return clearance(traj) <= radius; }
};

/// A synthetic scenario: raw demonstrations, constraints in the scenario's
/// aligned length, and the solver settings it was tuned for.
struct Fixture {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<Demonstration> demos;
  ConstraintSet constraints;
  std::optional<Obstacle> obstacle;
  SolverConfig config;

  DemonstrationSet demonstration_set() const;
};

std::vector<std::string> fixture_names();

/// Throws NotFound for unknown names. Output depends only on (name, seed).
Fixture make_fixture(const std::string& name, std::uint64_t seed);

}  // namespace dualdemo
