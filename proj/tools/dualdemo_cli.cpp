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

// Command-line front end. Talks to the library only through the C API.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "dualdemo/dualdemo.h"

namespace {

using Json = nlohmann::json;

/// Thrown for failures that should exit with status 1.
struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(dd_status status, const std::string& what) {
  if (status != DD_OK) throw Failure(what + ": " + dd_last_error());
}

/// Owns a string returned by the library.
std::string take(char* s) {
  std::string out = s != nullptr ? s : "";
  dd_string_free(s);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Failure("cannot write " + path);
}

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cell.size()) throw Failure("bad number '" + cell + "' in " + what);
    out.push_back(v);
  }
  return out;
}

/// "i:x,y[,z]" -> {"index": i, "target": [x, y, z]}.
Json parse_constraint(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Failure("constraint '" + text + "' must read i:x,y[,z]");
  std::size_t used = 0;
  long index = -1;
  try {
    index = std::stol(text.substr(0, colon), &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != colon || index < 0) throw Failure("bad constraint index in '" + text + "'");
  return {{"index", index}, {"target", parse_numbers(text.substr(colon + 1), "constraint '" + text + "'")}};
}

std::string format_of(const std::string& path) {
  const auto dot = path.rfind('.');
  return dot != std::string::npos && path.substr(dot) == ".csv" ? "csv" : "json";
}

struct Options {
  std::vector<std::string> demos;
  std::vector<std::string> labels;
  std::string fixture;
  std::string config_file;
  std::vector<std::string> constraints;
  std::optional<double> lambda, rho, gamma;
  std::string gamma_mode;
  std::string alphas;
  std::string k_range;
  std::optional<std::size_t> resample;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
};

void add_session_options(CLI::App* cmd, Options& o) {
  auto* demos = cmd->add_option("--demos", o.demos, "Demonstration files (TrajectoryFile JSON or CSV)");
  cmd->add_option("--labels", o.labels, "Labels for --demos, in order (success|failure)")->delimiter(',');
  auto* fixture = cmd->add_option("--fixture", o.fixture, "Fixture document from gen-fixture");
  demos->excludes(fixture);
  cmd->add_option("--config", o.config_file, "SolverConfig JSON file");
  cmd->add_option("--constraint", o.constraints, "Point constraint i:x,y[,z] (repeatable)");
  cmd->add_option("--lambda", o.lambda, "Elastic weight");
  cmd->add_option("--rho", o.rho, "Constraint penalty parameter");
  cmd->add_option("--gamma", o.gamma, "Failure gain");
  cmd->add_option("--gamma-mode", o.gamma_mode, "absolute|relative")->check(CLI::IsMember({"absolute", "relative"}));
  cmd->add_option("--alphas", o.alphas, "Frame weights c,g,l");
  cmd->add_option("--k-range", o.k_range, "Mixture size range min,max");
  cmd->add_option("--resample", o.resample, "Aligned trajectory length T");
  cmd->add_option("--seed", o.seed, "Random seed");
}

void add_output_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--out", o.out, "Output file (default stdout)");
  cmd->add_option("--format", o.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
}

class Session {
 public:
  ~Session() { dd_session_free(s_); }
  dd_session* get() const { return s_; }

  static std::unique_ptr<Session> build(const Options& o, Json* fixture_out = nullptr) {
    Json config = Json::object();
    Json constraints;
    std::vector<std::pair<std::string, std::string>> payloads;  // (text, format)
    std::vector<std::optional<std::string>> labels;

    if (!o.fixture.empty()) {
      Json fixture;
      try {
        fixture = Json::parse(read_file(o.fixture));
      } catch (const Json::parse_error& e) {
        throw Failure("malformed fixture " + o.fixture + ": " + e.what());
      }
      if (!fixture.is_object() || !fixture.contains("demos")) throw Failure("fixture " + o.fixture + " has no demos");
      if (fixture.contains("config")) config = fixture["config"];
      if (fixture.contains("constraints")) constraints = fixture["constraints"];
      for (const auto& d : fixture["demos"]) {
        payloads.emplace_back(d.dump(), "json");
        labels.emplace_back();
      }
      if (fixture_out != nullptr) *fixture_out = fixture;
    } else {
      if (o.demos.empty()) throw Failure("missing inputs: pass --demos or --fixture");
      if (!o.labels.empty() && o.labels.size() != o.demos.size())
        throw Failure("--labels has " + std::to_string(o.labels.size()) + " entries for " +
                      std::to_string(o.demos.size()) + " demos");
      for (std::size_t i = 0; i < o.demos.size(); ++i) {
        payloads.emplace_back(read_file(o.demos[i]), format_of(o.demos[i]));
        labels.emplace_back(o.labels.empty() ? std::nullopt : std::optional<std::string>(o.labels[i]));
      }
    }
    if (!o.labels.empty() && !o.fixture.empty()) throw Failure("--labels conflicts with --fixture");

    if (!o.config_file.empty()) {
      try {
        config.update(Json::parse(read_file(o.config_file)));
      } catch (const Json::parse_error& e) {
        throw Failure("malformed config " + o.config_file + ": " + e.what());
      }
    }
    if (o.lambda) config["lambda"] = *o.lambda;
    if (o.rho) config["rho"] = *o.rho;
    if (o.gamma) config["gamma"] = *o.gamma;
    if (!o.gamma_mode.empty()) config["gamma_mode"] = o.gamma_mode;
    if (o.resample) config["length"] = *o.resample;
    if (o.seed) config["seed"] = *o.seed;
    if (!o.alphas.empty()) {
      const auto a = parse_numbers(o.alphas, "--alphas");
      if (a.size() != 3) throw Failure("--alphas needs three values c,g,l");
      config["alphas"] = {{"cartesian", a[0]}, {"tangent", a[1]}, {"laplacian", a[2]}};
    }
    if (!o.k_range.empty()) {
      const auto k = parse_numbers(o.k_range, "--k-range");
      if (k.size() != 2) throw Failure("--k-range needs two values min,max");
      config["k_range"] = {static_cast<int>(k[0]), static_cast<int>(k[1])};
    }
    if (!o.constraints.empty()) {
      Json entries = Json::array();
      for (const auto& c : o.constraints) entries.push_back(parse_constraint(c));
      constraints = {{"entries", std::move(entries)}};
    }

    auto session = std::unique_ptr<Session>(new Session());
    check(dd_session_new(config.dump().c_str(), &session->s_), "invalid configuration");
    for (std::size_t i = 0; i < payloads.size(); ++i) {
      const char* label = labels[i] ? labels[i]->c_str() : nullptr;
      const std::string source = o.fixture.empty() ? o.demos[i] : o.fixture;
      check(dd_session_add_demo(session->s_, payloads[i].first.c_str(), payloads[i].second.c_str(), label, nullptr,
                                nullptr),
            "cannot import " + source);
    }
    if (!constraints.is_null()) {
      if (constraints.is_object()) constraints.erase("rho");
      check(dd_session_set_constraints(session->s_, constraints.dump().c_str()), "invalid constraints");
    }
    return session;
  }

 private:
  Session() = default;
  dd_session* s_ = nullptr;
};

std::string trajectory_csv(const Json& rows) {
  std::ostringstream out;
  out.precision(17);
  const std::size_t dim = rows.empty() ? 0 : rows[0].size();
  for (std::size_t d = 0; d < dim; ++d) out << (d ? "," : "") << "x" << d + 1;
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t d = 0; d < row.size(); ++d) out << (d ? "," : "") << row[d].get<double>();
    out << "\n";
  }
  return out.str();
}

int run_fit(const Options& o) {
  auto s = Session::build(o);
  char* models = nullptr;
  check(dd_session_fit(s->get(), &models), "fit failed");
  write_output(o.out, take(models));
  return 0;
}

int run_reproduce(const Options& o) {
  auto s = Session::build(o);
  char* rep = nullptr;
  dd_solve_status status = DD_SOLVE_DIRECT;
  check(dd_session_reproduce(s->get(), &rep, &status), "reproduce failed");
  std::string text = take(rep);
  if (o.format == "csv") text = trajectory_csv(Json::parse(text)["trajectory"]);
  write_output(o.out, text);
  // Only the exact and converged iterative paths count as convergence.
  return status == DD_SOLVE_DIRECT || status == DD_SOLVE_ITERATIVE_CONVERGED ? 0 : 2;
}

struct ObstacleLabeler {
  std::string fixture;
  int rounds = 0;
};

int obstacle_labeler(const char* reproduction, void* user) {
  auto* l = static_cast<ObstacleLabeler*>(user);
  const Json rep = Json::parse(reproduction);
  double clearance = 0.0;
  double radius = 0.0;
  if (dd_fixture_clearance(l->fixture.c_str(), rep["trajectory"].dump().c_str(), &clearance, &radius) != DD_OK) return -1;
  ++l->rounds;
  std::cerr << "round " << l->rounds << ": clearance " << clearance << " (radius " << radius << ")\n";
  return clearance > radius ? DD_LABEL_SUCCESS : DD_LABEL_FAILURE;
}

int prompt_labeler(const char*, void*) {
  for (;;) {
    std::cerr << "label reproduction [s]uccess/[f]ailure/[q]uit: " << std::flush;
    std::string answer;
    if (!std::getline(std::cin, answer) || answer == "q") return -1;
    if (answer == "s" || answer == "success") return DD_LABEL_SUCCESS;
    if (answer == "f" || answer == "failure") return DD_LABEL_FAILURE;
  }
}

int run_refine(const Options& o, const std::string& labeler, int max_iters) {
  Json fixture;
  auto s = Session::build(o, &fixture);
  ObstacleLabeler obstacle;
  dd_labeler fn = prompt_labeler;
  void* user = nullptr;
  if (labeler == "obstacle") {
    if (fixture.is_null() || fixture["obstacle"].is_null()) throw Failure("--labeler obstacle needs a --fixture with an obstacle");
    obstacle.fixture = fixture.dump();
    fn = obstacle_labeler;
    user = &obstacle;
  }
  char* history = nullptr;
  check(dd_session_refine(s->get(), fn, user, max_iters, &history), "refine failed");
  const std::string text = take(history);
  write_output(o.out, text);
  const Json h = Json::parse(text);
  return !h.empty() && h.back()["label"] == "success" ? 0 : 2;
}

int run_metrics(const std::string& a, const std::string& b, const std::string& out) {
  char* metrics = nullptr;
  check(dd_metrics(read_file(a).c_str(), read_file(b).c_str(), &metrics), "metrics failed");
  write_output(out, take(metrics));
  return 0;
}

int run_serve(std::string bind, std::string state_dir) {
  if (bind.empty()) {
    const char* env = std::getenv("DUALDEMO_BIND");
    bind = env != nullptr && *env != '\0' ? env : "127.0.0.1:8080";
  }
  if (state_dir.empty()) {
    const char* env = std::getenv("DUALDEMO_STATE_DIR");
    state_dir = env != nullptr && *env != '\0' ? env : "dualdemo-state";
  }
  // Signals are taken synchronously on a helper thread, which then stops the server.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  dd_server* srv = nullptr;
  check(dd_server_new(state_dir.c_str(), &srv), "cannot open state directory");
  int port = 0;
  if (dd_server_bind(srv, bind.c_str(), &port) != DD_OK) {
    const std::string msg = dd_last_error();
    dd_server_free(srv);
    throw Failure("cannot bind " + bind + ": " + msg);
  }
  std::cerr << "listening on " << bind.substr(0, bind.rfind(':')) << ":" << port << " (state in " << state_dir << ")\n";
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    dd_server_stop(srv);
  });
  const dd_status status = dd_server_run(srv);
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  dd_server_free(srv);
  check(status, "server failed");
  return 0;
}

int run_gen_fixture(const std::string& name, std::uint64_t seed, bool list, const std::string& out) {
  char* text = nullptr;
  if (list) {
    check(dd_fixture_names(&text), "cannot list fixtures");
  } else {
    if (name.empty()) throw Failure("missing fixture name (see --list)");
    check(dd_fixture(name.c_str(), seed, &text), "cannot generate fixture");
  }
  write_output(out, take(text));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory learning from successful and failed demonstrations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dd_version()));

  Options fit_opts, rep_opts, refine_opts;
  auto* fit = app.add_subcommand("fit", "Fit and print the mixture models of every subset");
  add_session_options(fit, fit_opts);
  fit->add_option("--out", fit_opts.out, "Output file (default stdout)");

  auto* rep = app.add_subcommand("reproduce", "Reproduce the skill under the given constraints");
  add_session_options(rep, rep_opts);
  add_output_options(rep, rep_opts);

  std::string labeler = "obstacle";
  int max_iters = 10;
  auto* refine = app.add_subcommand("refine", "Iterate from failures until a reproduction is labeled successful");
  add_session_options(refine, refine_opts);
  refine->add_option("--out", refine_opts.out, "Output file (default stdout)");
  refine->add_option("--labeler", labeler, "obstacle|prompt")->check(CLI::IsMember({"obstacle", "prompt"}));
  refine->add_option("--max-iters", max_iters, "Maximum refinement rounds")->check(CLI::PositiveNumber);

  std::string metric_a, metric_b, metric_out;
  auto* metrics = app.add_subcommand("metrics", "SSE, SEA and CRV between two trajectories");
  metrics->add_option("--a", metric_a, "First trajectory")->required();
  metrics->add_option("--b", metric_b, "Second trajectory")->required();
  metrics->add_option("--out", metric_out, "Output file (default stdout)");

  std::string bind, state_dir;
  auto* serve = app.add_subcommand("serve", "Run the HTTP session API");
  serve->add_option("--bind", bind, "host:port (default $DUALDEMO_BIND or 127.0.0.1:8080)");
  serve->add_option("--state-dir", state_dir, "Session log directory (default $DUALDEMO_STATE_DIR or ./dualdemo-state)");

  std::string fixture_name, fixture_out;
  std::uint64_t fixture_seed = 7;
  bool list = false;
  auto* gen = app.add_subcommand("gen-fixture", "Emit a synthetic scenario");
  gen->add_option("name", fixture_name, "Fixture name");
  gen->add_option("--seed", fixture_seed, "Random seed");
  gen->add_flag("--list", list, "List fixture names");
  gen->add_option("--out", fixture_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*fit) return run_fit(fit_opts);
    if (*rep) return run_reproduce(rep_opts);
    if (*refine) return run_refine(refine_opts, labeler, max_iters);
    if (*metrics) return run_metrics(metric_a, metric_b, metric_out);
    if (*serve) return run_serve(bind, state_dir);
    if (*gen) return run_gen_fixture(fixture_name, fixture_seed, list, fixture_out);
  } catch (const Failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
