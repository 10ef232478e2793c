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

#include "dualdemo/fixtures.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "dualdemo/error.hpp"
#include "dualdemo/random.hpp"

namespace dualdemo {

namespace {

constexpr std::size_t kRawLength = 60;
constexpr std::size_t kAligned = 100;

using Shape = std::function<Eigen::Vector2d(double)>;

constexpr double kNoise = 0.003;

/// Samples a planar curve, adds a smooth endpoint-preserving wobble
/// sum_j a_j sin(j pi s) to its y coordinate and white noise to interior
/// samples.
Trajectory sample_curve(const Shape& shape, double wobble, Rng& rng, double noise = kNoise) {
  const std::size_t raw_len = kRawLength;
  double amp[3];
  for (double& a : amp) a = rng.normal(0.0, wobble);
  Points p(static_cast<Eigen::Index>(raw_len), 2);
  for (std::size_t i = 0; i < raw_len; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(raw_len - 1);
    Eigen::Vector2d q = shape(s);
    for (int j = 0; j < 3; ++j) q.y() += amp[j] * std::sin(static_cast<double>(j + 2) * std::numbers::pi * s);
    if (noise > 0.0 && i > 0 && i + 1 < raw_len) q += Eigen::Vector2d(rng.normal(0.0, noise), rng.normal(0.0, noise));
    p.row(static_cast<Eigen::Index>(i)) = q.transpose();
  }
  return Trajectory(std::move(p));
}

Shape bump(Eigen::Vector2d from, Eigen::Vector2d to, double height) {
  return [=](double s) {
    Eigen::Vector2d q = from + s * (to - from);
    q.y() += height * std::sin(std::numbers::pi * s);
    return q;
  };
}

void configure(Fixture& f, double lambda, double rho, double gamma, GammaMode mode = GammaMode::Relative) {
  f.config.length = kAligned;
  f.config.lambda = lambda;
  f.config.rho = rho;
  f.config.gamma = gamma;
  f.config.gamma_mode = mode;
  f.config.fit.seed = f.seed;
  f.constraints.rho = rho;
}

PointConstraint at(std::size_t index, double x, double y) { return {index, Eigen::Vector2d(x, y)}; }

Fixture reaching_obstacle(std::uint64_t seed) {
  Fixture f;
  f.name = "reaching-obstacle";
  f.seed = seed;
  Rng rng(seed);
  const Eigen::Vector2d start(0.0, 0.0), goal(1.0, 0.0);
  int i = 0;
  for (double h : {-0.16, -0.06, 0.10, 0.18})
    f.demos.push_back({"success-" + std::to_string(++i), sample_curve(bump(start, goal, h), 0.004, rng), Label::Successful});
  i = 0;
  for (double h : {-0.03, -0.05})
    f.demos.push_back({"failure-" + std::to_string(++i), sample_curve(bump(start, goal, h), 0.004, rng), Label::Failed});
  f.constraints.entries = {at(0, 0.0, 0.0), at(kAligned - 1, 1.0, 0.0)};
  f.obstacle = Obstacle{Eigen::Vector2d(0.5, 0.0), 0.05};
  configure(f, 3e6, 1e-8, 0.95);
  return f;
}

Fixture iterate_obstacle(std::uint64_t seed) {
  Fixture f;
  f.name = "iterate-obstacle";
  f.seed = seed;
  Rng rng(seed);
  f.demos.push_back({"failure-1", sample_curve(bump({0.0, 0.0}, {1.0, 0.0}, -0.02), 0.004, rng), Label::Failed});
  f.constraints.entries = {at(0, 0.0, 0.0), at(kAligned - 1, 1.0, 0.0)};
  f.obstacle = Obstacle{Eigen::Vector2d(0.5, 0.0), 0.05};
  configure(f, 1e4, 1e-6, 1.0);
  return f;
}

Fixture empty_sets(std::uint64_t seed) {
  Fixture f;
  f.name = "empty-sets";
  f.seed = seed;
  Rng rng(seed);
  const Eigen::Vector2d goal(1.0, 0.0);
  int i = 0;
  for (double h : {0.22, 0.30})
    f.demos.push_back({"success-" + std::to_string(++i), sample_curve(bump({0.0, 0.45}, goal, h), 0.004, rng), Label::Successful});
  i = 0;
  for (double h : {-0.12, -0.18})
    f.demos.push_back({"failure-" + std::to_string(++i), sample_curve(bump({0.0, 0.1}, goal, h), 0.004, rng), Label::Failed});
  f.constraints.entries = {at(0, 0.0, 0.15), at(50, 0.5, 0.45), at(kAligned - 1, 1.0, 0.0)};
  configure(f, 1e3, 1e-8, 0.5);
  return f;
}

Fixture curved_skill(std::uint64_t seed) {
  Fixture f;
  f.name = "curved-skill";
  f.seed = seed;
  Rng rng(seed);
  auto wave = [](double amplitude) -> Shape {
    return [=](double u) {
      return Eigen::Vector2d(u, amplitude * std::sin(2.0 * std::numbers::pi * u));
    };
  };
  int i = 0;
  for (double a : {0.26, 0.28, 0.30, 0.32, 0.34})
    f.demos.push_back({"success-" + std::to_string(++i), sample_curve(wave(a), 0.004, rng, 0.0), Label::Successful});
  // The targets translate the whole skill upwards.
  f.constraints.entries = {at(0, 0.0, 0.1), at(kAligned - 1, 1.0, 0.1)};
  configure(f, 10.0, 1e-8, 1.0);
  return f;
}

Fixture bimodal(std::uint64_t seed) {
  Fixture f;
  f.name = "bimodal";
  f.seed = seed;
  Rng rng(seed);
  // Kept small: each extra component buys a little likelihood on a
  // uniform-in-time segment, and that gain grows with the sample count.
  constexpr std::size_t kPerBundle = 2;
  constexpr std::size_t kLength = 50;
  for (int bundle = 0; bundle < 2; ++bundle) {
    const double offset = bundle == 0 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < kPerBundle; ++j) {
      Points p(static_cast<Eigen::Index>(kLength), 1);
      const double shift = rng.normal(0.0, 0.02);
      for (std::size_t k = 0; k < kLength; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(kLength - 1);
        p(static_cast<Eigen::Index>(k), 0) = t + offset + shift + rng.normal(0.0, 0.01);
      }
      f.demos.push_back({"bundle" + std::to_string(bundle) + "-" + std::to_string(j), Trajectory(std::move(p)),
                         Label::Successful});
    }
  }
  f.config.length = kLength;
  f.config.fit.seed = seed;
  return f;
}

Fixture single_demo(std::uint64_t seed) {
  Fixture f;
  f.name = "single-demo";
  f.seed = seed;
  Rng rng(seed);
  f.demos.push_back({"success-1", sample_curve(bump({0.0, 0.0}, {1.0, 0.5}, 0.2), 0.004, rng), Label::Successful});
  const Trajectory aligned = resample(f.demos.front().trajectory, kAligned);
  f.constraints.entries = {{0, aligned.point(0)}, {kAligned - 1, aligned.point(kAligned - 1)}};
  f.config.length = kAligned;
  f.config.lambda = 1e-3;
  f.config.rho = 1e-6;
  f.config.fit.seed = seed;
  f.constraints.rho = f.config.rho;
  return f;
}

}  // namespace

double Obstacle::clearance(const Trajectory& traj) const {
  require(static_cast<std::size_t>(center.size()) == traj.dim(), ErrorCode::InvalidArgument,
          "obstacle and trajectory dimensions differ");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < traj.length(); ++i) {
    const Eigen::VectorXd a = traj.point(i);
    const Eigen::VectorXd d = traj.point(i + 1) - a;
    const double len2 = d.squaredNorm();
    const double s = len2 > 0.0 ? std::clamp((center - a).dot(d) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (a + s * d - center).norm());
  }
  return best;
}

DemonstrationSet Fixture::demonstration_set() const {
  DemonstrationSet set;
  for (const auto& d : demos) set.add(d);
  return set;
}

std::vector<std::string> fixture_names() {
  return {"reaching-obstacle", "iterate-obstacle", "empty-sets", "curved-skill", "bimodal", "single-demo"};
}

Fixture make_fixture(const std::string& name, std::uint64_t seed) {
  Fixture f;
  if (name == "reaching-obstacle") f = reaching_obstacle(seed);
  else if (name == "iterate-obstacle") f = iterate_obstacle(seed);
  else if (name == "empty-sets") f = empty_sets(seed);
  else if (name == "curved-skill") f = curved_skill(seed);
  else if (name == "bimodal") f = bimodal(seed);
  else if (name == "single-demo") f = single_demo(seed);
  else throw Error(ErrorCode::NotFound, "unknown fixture '" + name + "'");
  // Synthetic samples are imported as generated.
  f.config.smoothing_window = 1;
  return f;
}

}  // namespace dualdemo
