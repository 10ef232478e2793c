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

#include "dualdemo/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "dualdemo/error.hpp"

namespace dualdemo {

namespace {

[[noreturn]] void schema_error(const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); }

double number(const Json& j, const std::string& what) {
  if (!j.is_number()) schema_error(what + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(what + " must be finite");
  return v;
}

std::size_t count(const Json& j, const std::string& what) {
  if (!j.is_number_integer() || j.get<long long>() < 0) schema_error(what + " must be a non-negative integer");
  return j.get<std::size_t>();
}

int integer(const Json& j, const std::string& what) {
  if (!j.is_number_integer()) schema_error(what + " must be an integer");
  return j.get<int>();
}

Json vector_json(const Eigen::VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) schema_error(what + " must be a non-empty array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], what + "[" + std::to_string(i) + "]");
  return v;
}

std::size_t effective_window(std::size_t window, std::size_t length) {
  if (window <= 1) return 1;
  std::size_t w = std::min(window, length);
  if (w % 2 == 0) --w;
  return w;
}

Demonstration finish(Trajectory traj, std::optional<Label> label, std::string id, const ImportOptions& opts) {
  if (opts.label) label = opts.label;
  if (opts.id) id = *opts.id;
  require(label.has_value(), ErrorCode::InvalidArgument, "missing label");
  const std::size_t w = effective_window(opts.smoothing_window, traj.length());
  if (w > 1) traj = smooth(traj, w);
  return {std::move(id), std::move(traj), *label};
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  const std::string s(cell);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

Json path_means(const std::optional<RegressedPath>& path) {
  if (!path) return nullptr;
  return to_json(path->means);
}

}  // namespace

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Parse, std::string("malformed JSON: ") + e.what());
  }
}

Json to_json(const Points& points) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index d = 0; d < points.cols(); ++d) row.push_back(points(i, d));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Trajectory& traj) { return to_json(traj.points()); }

Points points_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) schema_error(what + " must be a non-empty array of rows");
  std::size_t width = 0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& row = j[i];
    if (!row.is_array()) schema_error(what + " row " + std::to_string(i) + " is not an array");
    if (i == 0) width = row.size();
    if (row.size() != width || width == 0)
      schema_error(what + " row " + std::to_string(i) + " has " + std::to_string(row.size()) + " values, expected " +
                   std::to_string(width));
  }
  Points out(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < j.size(); ++i)
    for (std::size_t d = 0; d < width; ++d)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
          number(j[i][d], what + " row " + std::to_string(i) + " column " + std::to_string(d));
  return out;
}

Trajectory trajectory_from_json(const Json& j, const std::string& what) { return Trajectory(points_from_json(j, what)); }

Demonstration import_demo_json(const Json& doc, const ImportOptions& opts) {
  if (!doc.is_object()) schema_error("trajectory document must be an object");
  for (const auto& [key, value] : doc.items())
    if (key != "dim" && key != "points" && key != "label" && key != "id") schema_error("unknown field '" + key + "'");
  if (!doc.contains("points")) schema_error("missing field 'points'");
  Points pts = points_from_json(doc["points"], "points");
  if (doc.contains("dim") && count(doc["dim"], "dim") != static_cast<std::size_t>(pts.cols()))
    schema_error("dim " + std::to_string(doc["dim"].get<std::size_t>()) + " does not match row width " +
                 std::to_string(pts.cols()));
  std::optional<Label> label;
  if (doc.contains("label") && !doc["label"].is_null()) {
    if (!doc["label"].is_string()) schema_error("label must be a string or null");
    label = parse_label(doc["label"].get<std::string>());
    if (!label) schema_error("unknown label '" + doc["label"].get<std::string>() + "'");
  }
  std::string id;
  if (doc.contains("id") && !doc["id"].is_null()) {
    if (!doc["id"].is_string()) schema_error("id must be a string");
    id = doc["id"].get<std::string>();
  }
  return finish(Trajectory(std::move(pts)), label, std::move(id), opts);
}

Demonstration import_demo_csv(std::string_view text, const ImportOptions& opts) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  bool first = true;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find('\n', start);
    const auto line = trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    start = pos == std::string_view::npos ? text.size() + 1 : pos + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    std::vector<double> row;
    bool numeric = true;
    for (const auto cell : cells) {
      const auto v = parse_double(cell);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
    }
    if (!numeric) {
      if (!first) throw Error(ErrorCode::Parse, "non-numeric value on CSV line " + std::to_string(line_no));
      for (std::size_t d = 0; d < cells.size(); ++d)
        if (cells[d] != "x" + std::to_string(d + 1))
          throw Error(ErrorCode::Parse, "CSV header must read x1,..,xn");
      first = false;
      continue;
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size())
      schema_error("CSV row " + std::to_string(rows.size()) + " has " + std::to_string(row.size()) + " values, expected " +
                   std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), ErrorCode::Parse, "CSV holds no samples");
  return finish(Trajectory::from_rows(rows), std::nullopt, std::string(), opts);
}

Demonstration import_demo(std::string_view text, std::string_view format, const ImportOptions& opts) {
  if (format == "json") return import_demo_json(parse_json(text), opts);
  if (format == "csv") return import_demo_csv(text, opts);
  schema_error("unknown demo format '" + std::string(format) + "'");
}

Json to_json(const Demonstration& demo) {
  return {{"dim", demo.trajectory.dim()},
          {"points", to_json(demo.trajectory)},
          {"label", std::string(to_string(demo.label))},
          {"id", demo.id}};
}

Json to_json(const ConstraintSet& cs) {
  Json entries = Json::array();
  for (const auto& e : cs.entries) entries.push_back({{"index", e.index}, {"target", vector_json(e.target)}});
  return {{"rho", cs.rho}, {"entries", std::move(entries)}};
}

ConstraintSet constraints_from_json(const Json& j, double default_rho) {
  if (!j.is_object()) schema_error("constraints must be an object");
  ConstraintSet cs;
  cs.rho = default_rho;
  for (const auto& [key, value] : j.items()) {
    if (key == "rho") {
      cs.rho = number(value, "rho");
      if (cs.rho <= 0.0) schema_error("rho must be positive");
    } else if (key == "entries") {
      if (!value.is_array()) schema_error("entries must be an array");
      for (std::size_t i = 0; i < value.size(); ++i) {
        const auto& e = value[i];
        const std::string where = "entries[" + std::to_string(i) + "]";
        if (!e.is_object() || !e.contains("index") || !e.contains("target"))
          schema_error(where + " needs 'index' and 'target'");
        cs.entries.push_back({count(e["index"], where + ".index"), vector_from_json(e["target"], where + ".target")});
      }
    } else {
      schema_error("unknown field '" + key + "'");
    }
  }
  return cs;
}

Json to_json(const SolverConfig& cfg) {
  return {{"length", cfg.length},
          {"lambda", cfg.lambda},
          {"rho", cfg.rho},
          {"gamma", cfg.gamma},
          {"gamma_mode", std::string(to_string(cfg.gamma_mode))},
          {"alphas", {{"cartesian", cfg.alphas.cartesian}, {"tangent", cfg.alphas.tangent}, {"laplacian", cfg.alphas.laplacian}}},
          {"k_range", {cfg.fit.k_min, cfg.fit.k_max}},
          {"max_em_iters", cfg.fit.max_em_iters},
          {"em_tolerance", cfg.fit.tolerance},
          {"floor_scale", cfg.fit.floor_scale},
          {"restarts", cfg.fit.restarts},
          {"seed", cfg.fit.seed},
          {"max_iters", cfg.solve.max_iters},
          {"solve_tolerance", cfg.solve.tolerance},
          {"trust_radius_scale", cfg.trust_radius_scale},
          {"repulsion_spread", cfg.repulsion_spread},
          {"smoothing_window", cfg.smoothing_window}};
}

SolverConfig config_from_json(const Json& j, SolverConfig cfg) {
  if (!j.is_object()) schema_error("config must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "length") {
      cfg.length = count(v, key);
    } else if (key == "lambda") {
      cfg.lambda = number(v, key);
    } else if (key == "rho") {
      cfg.rho = number(v, key);
    } else if (key == "gamma") {
      cfg.gamma = number(v, key);
    } else if (key == "gamma_mode") {
      if (!v.is_string()) schema_error("gamma_mode must be a string");
      cfg.gamma_mode = parse_gamma_mode(v.get<std::string>());
    } else if (key == "alphas") {
      if (!v.is_object()) schema_error("alphas must be an object");
      for (const auto& [name, a] : v.items()) {
        if (name == "cartesian") cfg.alphas.cartesian = number(a, "alphas.cartesian");
        else if (name == "tangent") cfg.alphas.tangent = number(a, "alphas.tangent");
        else if (name == "laplacian") cfg.alphas.laplacian = number(a, "alphas.laplacian");
        else schema_error("unknown field 'alphas." + name + "'");
      }
    } else if (key == "k_range") {
      if (!v.is_array() || v.size() != 2) schema_error("k_range must be [k_min, k_max]");
      cfg.fit.k_min = integer(v[0], "k_range[0]");
      cfg.fit.k_max = integer(v[1], "k_range[1]");
    } else if (key == "max_em_iters") {
      cfg.fit.max_em_iters = integer(v, key);
    } else if (key == "em_tolerance") {
      cfg.fit.tolerance = number(v, key);
    } else if (key == "floor_scale") {
      cfg.fit.floor_scale = number(v, key);
    } else if (key == "restarts") {
      cfg.fit.restarts = integer(v, key);
    } else if (key == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        schema_error("seed must be a non-negative integer");
      cfg.fit.seed = v.get<std::uint64_t>();
    } else if (key == "max_iters") {
      cfg.solve.max_iters = integer(v, key);
    } else if (key == "solve_tolerance") {
      cfg.solve.tolerance = number(v, key);
    } else if (key == "trust_radius_scale") {
      cfg.trust_radius_scale = number(v, key);
    } else if (key == "repulsion_spread") {
      cfg.repulsion_spread = number(v, key);
    } else if (key == "smoothing_window") {
      cfg.smoothing_window = count(v, key);
    } else {
      schema_error("unknown config field '" + key + "'");
    }
  }
  if (cfg.length < 3) schema_error("length must be at least 3");
  if (cfg.lambda < 0.0) schema_error("lambda must be non-negative");
  if (cfg.rho <= 0.0) schema_error("rho must be positive");
  if (cfg.gamma < 0.0) schema_error("gamma must be non-negative");
  if (cfg.fit.k_min < 1 || cfg.fit.k_max < cfg.fit.k_min) schema_error("k_range must satisfy 1 <= k_min <= k_max");
  if (cfg.fit.restarts < 1) schema_error("restarts must be positive");
  if (cfg.fit.max_em_iters < 1) schema_error("max_em_iters must be positive");
  if (cfg.solve.max_iters < 1) schema_error("max_iters must be positive");
  cfg.alphas.validate();
  return cfg;
}

Json to_json(const CostBreakdown& c) {
  return {{"success", c.success_term},
          {"failure", c.failure_term},
          {"elastic", c.elastic_term},
          {"penalty", c.penalty_term},
          {"total", c.total}};
}

Json to_json(const SolverReport& r) {
  return {{"status", std::string(to_string(r.status))},
          {"converged", converged(r.status)},
          {"iterations", r.iterations},
          {"max_residual", r.max_residual},
          {"costs", to_json(r.costs)}};
}

Json to_json(const MixtureModel& model) {
  Json comps = Json::array();
  for (const auto& c : model.components()) {
    // Row-major flattening of the (n + 1) x (n + 1) covariance.
    std::vector<double> cov;
    for (Eigen::Index r = 0; r < c.covariance.rows(); ++r)
      for (Eigen::Index k = 0; k < c.covariance.cols(); ++k) cov.push_back(c.covariance(r, k));
    comps.push_back({{"prior", c.prior}, {"mean", vector_json(c.mean)}, {"covariance", std::move(cov)}});
  }
  return {{"k", model.k()},
          {"dim", model.dim()},
          {"floor", model.floor()},
          {"time_range", {model.t_min(), model.t_max()}},
          {"components", std::move(comps)}};
}

Json to_json(const std::vector<BicEntry>& table) {
  Json rows = Json::array();
  for (const auto& e : table) {
    Json row = {{"k", e.k}, {"ok", e.ok}};
    if (e.ok) {
      row["log_likelihood"] = e.log_likelihood;
      row["parameters"] = e.parameters;
      row["bic"] = e.bic;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const MetricReport& m) { return {{"sse", m.sse}, {"sea", m.sea}, {"crv", m.crv}}; }

Json to_json(const Reproduction& rep) {
  Json models = Json::array();
  for (const auto& f : rep.frames)
    models.push_back({{"frame", std::string(to_string(f.frame))},
                      {"alpha", f.alpha},
                      {"success_mean", path_means(f.success)},
                      {"failure_mean", path_means(f.failure)},
                      {"weights", f.weights}});
  return {{"length", rep.trajectory.length()},
          {"dim", rep.trajectory.dim()},
          {"trajectory", to_json(rep.trajectory)},
          {"costs", to_json(rep.report.costs)},
          {"report", to_json(rep.report)},
          {"effective_gamma", rep.effective_gamma},
          {"models", std::move(models)},
          {"config", to_json(rep.config)}};
}

Json to_json(const Fixture& f) {
  Json demos = Json::array();
  for (const auto& d : f.demos) demos.push_back(to_json(d));
  Json obstacle = nullptr;
  if (f.obstacle) obstacle = {{"center", vector_json(f.obstacle->center)}, {"radius", f.obstacle->radius}};
  return {{"name", f.name},
          {"seed", f.seed},
          {"demos", std::move(demos)},
          {"constraints", to_json(f.constraints)},
          {"obstacle", std::move(obstacle)},
          {"config", to_json(f.config)}};
}

Fixture fixture_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("demos")) schema_error("fixture document needs 'demos'");
  Fixture f;
  if (j.contains("name") && j["name"].is_string()) f.name = j["name"].get<std::string>();
  if (j.contains("seed")) f.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("config")) f.config = config_from_json(j["config"]);
  if (j.contains("constraints")) f.constraints = constraints_from_json(j["constraints"], f.config.rho);
  if (j.contains("obstacle") && !j["obstacle"].is_null())
    f.obstacle = Obstacle{vector_from_json(j["obstacle"]["center"], "obstacle.center"),
                          number(j["obstacle"]["radius"], "obstacle.radius")};
  ImportOptions raw;
  raw.smoothing_window = 1;
  for (const auto& d : j["demos"]) f.demos.push_back(import_demo_json(d, raw));
  return f;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string to_csv(const Trajectory& traj) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t d = 0; d < traj.dim(); ++d) out << (d ? "," : "") << "x" << d + 1;
  out << "\n";
  for (std::size_t i = 0; i < traj.length(); ++i) {
    for (std::size_t d = 0; d < traj.dim(); ++d)
      out << (d ? "," : "") << traj.points()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d));
    out << "\n";
  }
  return out.str();
}

}  // namespace dualdemo
