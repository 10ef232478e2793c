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
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dualdemo/fixtures.hpp"
#include "dualdemo/metrics.hpp"
#include "dualdemo/mixture.hpp"
#include "dualdemo/objective.hpp"
#include "dualdemo/solver.hpp"
#include "dualdemo/trajectory.hpp"

namespace dualdemo {

using Json = nlohmann::json;

/// Parses text as JSON, mapping syntax errors onto ErrorCode::Parse.
Json parse_json(std::string_view text);

Json to_json(const Points& points);
Json to_json(const Trajectory& traj);
/// Rectangular array of finite numbers. `what` names the field in errors.
Points points_from_json(const Json& j, const std::string& what);
Trajectory trajectory_from_json(const Json& j, const std::string& what);

struct ImportOptions {
  /// Moving-average window; clamped to the largest odd value <= T. 1 disables.
  std::size_t smoothing_window = 5;
  /// Overrides the document's label; required for CSV.
  std::optional<Label> label;
  /// Overrides the document's id.
  std::optional<std::string> id;
};

/// TrajectoryFile: {"dim": n, "points": [[...], ...], "label": "success"|"failure"|null, "id": string}.
/// Returns the validated, smoothed demonstration at its recorded length;
/// alignment to the session length happens at reproduce time.
Demonstration import_demo_json(const Json& doc, const ImportOptions& opts);
/// CSV with an optional "x1,..,xn" header row.
Demonstration import_demo_csv(std::string_view text, const ImportOptions& opts);
/// Dispatches on `format` ("json" or "csv").
Demonstration import_demo(std::string_view text, std::string_view format, const ImportOptions& opts);

/// TrajectoryFile document for a demonstration.
Json to_json(const Demonstration& demo);

Json to_json(const ConstraintSet& cs);
/// {"rho": r, "entries": [{"index": i, "target": [...]}, ...]}; rho optional.
ConstraintSet constraints_from_json(const Json& j, double default_rho);

Json to_json(const SolverConfig& cfg);
/// Applies the keys present in `j` on top of `base`; unknown keys are rejected.
SolverConfig config_from_json(const Json& j, SolverConfig base = {});

Json to_json(const CostBreakdown& costs);
Json to_json(const SolverReport& report);
Json to_json(const MixtureModel& model);
Json to_json(const std::vector<BicEntry>& table);
Json to_json(const MetricReport& report);
/// Trajectory, costs, report, effective gain, and the regressed means of every
/// active frame.
Json to_json(const Reproduction& rep);
Json to_json(const Fixture& fixture);
Fixture fixture_from_json(const Json& j);

/// Canonical text form; identical documents always produce identical bytes.
std::string dump(const Json& j);

/// One row per sample, header "x1,..,xn".
std::string to_csv(const Trajectory& traj);

}  // namespace dualdemo
