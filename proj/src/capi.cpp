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

#include "dualdemo/dualdemo.h"

#include <cstring>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "dualdemo/error.hpp"
#include "dualdemo/fixtures.hpp"
#include "dualdemo/io.hpp"
#include "dualdemo/metrics.hpp"
#include "dualdemo/server.hpp"
#include "dualdemo/session.hpp"

struct dd_session {
  dualdemo::Session session;
};

struct dd_server {
  std::unique_ptr<dualdemo::SessionStore> store;
  std::unique_ptr<dualdemo::HttpServer> http;
};

namespace {

using dualdemo::Error;
using dualdemo::ErrorCode;
using dualdemo::Json;

thread_local std::string last_error;

dd_status status_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return DD_ERR_INVALID_ARGUMENT;
    case ErrorCode::Parse: return DD_ERR_PARSE;
    case ErrorCode::NotFound: return DD_ERR_NOT_FOUND;
    case ErrorCode::Conflict: return DD_ERR_CONFLICT;
    case ErrorCode::Numeric: return DD_ERR_NUMERIC;
    case ErrorCode::DegenerateFit: return DD_ERR_DEGENERATE_FIT;
    case ErrorCode::InsufficientData: return DD_ERR_INSUFFICIENT_DATA;
    case ErrorCode::Io: return DD_ERR_IO;
  }
  return DD_ERR_INTERNAL;
}

template <typename Fn>
dd_status guard(Fn&& fn) noexcept {
  last_error.clear();
  try {
    fn();
    return DD_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const Json::exception& e) {
    last_error = e.what();
    return DD_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return DD_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return DD_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return DD_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

char* copy_out(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

dualdemo::Label to_label(dd_label label) {
  if (label == DD_LABEL_SUCCESS) return dualdemo::Label::Successful;
  if (label == DD_LABEL_FAILURE) return dualdemo::Label::Failed;
  throw Error(ErrorCode::InvalidArgument, "unknown label value");
}

dd_solve_status solve_status_of(const std::string& name) {
  using dualdemo::SolveStatus;
  for (auto s : {SolveStatus::DirectSolve, SolveStatus::IterativeConverged, SolveStatus::IterativeMaxIters,
                 SolveStatus::IndefiniteFallback})
    if (dualdemo::to_string(s) == name) return static_cast<dd_solve_status>(static_cast<int>(s));
  throw Error(ErrorCode::Parse, "unknown solve status '" + name + "'");
}

dualdemo::Trajectory operand(const char* text, const char* what) {
  need(text, what);
  const Json j = dualdemo::parse_json(text);
  if (j.is_object()) {
    if (!j.contains("points")) throw Error(ErrorCode::InvalidArgument, std::string(what) + " needs 'points'");
    return dualdemo::trajectory_from_json(j["points"], what);
  }
  return dualdemo::trajectory_from_json(j, what);
}

}  // namespace

extern "C" {

const char* dd_version(void) { return "0.1.0"; }

const char* dd_last_error(void) { return last_error.c_str(); }

void dd_string_free(char* s) { std::free(s); }

dd_status dd_session_new(const char* config_json, dd_session** out) {
  return guard([&] {
    need(out, "out");
    dualdemo::SolverConfig cfg;
    if (config_json != nullptr) cfg = dualdemo::config_from_json(dualdemo::parse_json(config_json));
    *out = new dd_session{dualdemo::Session("local", cfg)};
  });
}

void dd_session_free(dd_session* s) { delete s; }

dd_status dd_session_add_demo(dd_session* s, const char* payload, const char* format, const char* label, const char* id,
                              char** id_out) {
  return guard([&] {
    need(s, "session");
    need(payload, "payload");
    dualdemo::ImportOptions opts;
    opts.smoothing_window = s->session.config().smoothing_window;
    if (label != nullptr) {
      opts.label = dualdemo::parse_label(label);
      if (!opts.label) throw Error(ErrorCode::InvalidArgument, std::string("unknown label '") + label + "'");
    }
    if (id != nullptr) opts.id = id;
    auto demo = dualdemo::import_demo(payload, format != nullptr ? format : "json", opts);
    const Json e = s->session.add_demo_event(std::move(demo));
    s->session.apply(e);
    if (id_out != nullptr) *id_out = copy_out(e["demo"]["id"].get<std::string>());
  });
}

dd_status dd_session_relabel(dd_session* s, const char* id, dd_label label) {
  return guard([&] {
    need(s, "session");
    need(id, "id");
    s->session.apply(s->session.relabel_event(id, to_label(label)));
  });
}

dd_status dd_session_remove_demo(dd_session* s, const char* id) {
  return guard([&] {
    need(s, "session");
    need(id, "id");
    s->session.apply(s->session.remove_demo_event(id));
  });
}

dd_status dd_session_set_constraints(dd_session* s, const char* constraints_json) {
  return guard([&] {
    need(s, "session");
    need(constraints_json, "constraints");
    s->session.apply(s->session.constraints_events(dualdemo::parse_json(constraints_json)));
  });
}

dd_status dd_session_set_config(dd_session* s, const char* config_json) {
  return guard([&] {
    need(s, "session");
    need(config_json, "config");
    s->session.apply(s->session.config_event(dualdemo::parse_json(config_json)));
  });
}

dd_status dd_session_state(const dd_session* s, char** state_json) {
  return guard([&] {
    need(s, "session");
    need(state_json, "out");
    *state_json = copy_out(dualdemo::dump(s->session.state_json()));
  });
}

dd_status dd_session_export(const dd_session* s, char** events_jsonl) {
  return guard([&] {
    need(s, "session");
    need(events_jsonl, "out");
    std::string text;
    for (const auto& e : s->session.export_events()) text += e.dump() + "\n";
    *events_jsonl = copy_out(text);
  });
}

dd_status dd_session_import(const char* events_jsonl, dd_session** out) {
  return guard([&] {
    need(events_jsonl, "events");
    need(out, "out");
    std::vector<Json> events;
    std::istringstream in(events_jsonl);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) events.push_back(dualdemo::parse_json(line));
    *out = new dd_session{dualdemo::replay(events)};
  });
}

dd_status dd_session_fit(const dd_session* s, char** models_json) {
  return guard([&] {
    need(s, "session");
    need(models_json, "out");
    const auto& session = s->session;
    if (session.demos().empty()) throw Error(ErrorCode::InsufficientData, "session has no demonstrations");
    const auto& cfg = session.config();
    const auto aligned = dualdemo::align_set(session.demos(), cfg.length);
    Json models = Json::array();
    for (auto frame : {dualdemo::CoordinateFrame::Cartesian, dualdemo::CoordinateFrame::Tangent,
                       dualdemo::CoordinateFrame::Laplacian}) {
      if (cfg.alphas.of(frame) <= 0.0) continue;
      for (auto label : {dualdemo::Label::Successful, dualdemo::Label::Failed}) {
        if (aligned.trajectories(label).empty()) continue;
        std::vector<dualdemo::BicEntry> table;
        const auto model = dualdemo::fit_subset(aligned, label, frame, cfg, &table);
        models.push_back({{"frame", std::string(dualdemo::to_string(frame))},
                          {"label", std::string(dualdemo::to_string(label))},
                          {"model", dualdemo::to_json(model)},
                          {"bic", dualdemo::to_json(table)}});
      }
    }
    *models_json = copy_out(dualdemo::dump(Json{{"models", std::move(models)}}));
  });
}

dd_status dd_session_reproduce(dd_session* s, char** reproduction_json, dd_solve_status* solve_status) {
  return guard([&] {
    need(s, "session");
    need(reproduction_json, "out");
    s->session.apply(s->session.reproduce_event());
    const Json& rep = s->session.history().back().reproduction;
    if (solve_status != nullptr) *solve_status = solve_status_of(rep["report"]["status"].get<std::string>());
    *reproduction_json = copy_out(dualdemo::dump(rep));
  });
}

dd_status dd_session_refine(dd_session* s, dd_labeler labeler, void* user, int max_iters, char** history_json) {
  return guard([&] {
    need(s, "session");
    need(reinterpret_cast<const void*>(labeler), "labeler");
    need(history_json, "out");
    if (max_iters < 1) throw Error(ErrorCode::InvalidArgument, "max_iters must be >= 1");
    Json history = Json::array();
    for (int it = 0; it < max_iters; ++it) {
      s->session.apply(s->session.reproduce_event());
      const Json& rep = s->session.history().back().reproduction;
      const int verdict = labeler(dualdemo::dump(rep).c_str(), user);
      if (verdict < 0) throw Error(ErrorCode::InvalidArgument, "labeler aborted refinement");
      const auto label = to_label(static_cast<dd_label>(verdict));
      history.push_back({{"label", std::string(dualdemo::to_string(label))}, {"reproduction", rep}});
      s->session.apply(s->session.label_events(label));
      if (label == dualdemo::Label::Successful) break;
    }
    *history_json = copy_out(dualdemo::dump(history));
  });
}

dd_status dd_metrics(const char* a_json, const char* b_json, char** metrics_json) {
  return guard([&] {
    need(metrics_json, "out");
    const auto m = dualdemo::compare(operand(a_json, "a"), operand(b_json, "b"));
    *metrics_json = copy_out(dualdemo::dump(dualdemo::to_json(m)));
  });
}

dd_status dd_metrics_raw(const double* a, const double* b, size_t length, size_t dim, double out[3]) {
  return guard([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    const auto ta = dualdemo::Trajectory::from_flat({a, length * dim}, length, dim);
    const auto tb = dualdemo::Trajectory::from_flat({b, length * dim}, length, dim);
    const auto m = dualdemo::compare(ta, tb);
    out[0] = m.sse;
    out[1] = m.sea;
    out[2] = m.crv;
  });
}

dd_status dd_fixture_names(char** names) {
  return guard([&] {
    need(names, "out");
    std::string text;
    for (const auto& n : dualdemo::fixture_names()) text += n + "\n";
    *names = copy_out(text);
  });
}

dd_status dd_fixture(const char* name, uint64_t seed, char** fixture_json) {
  return guard([&] {
    need(name, "name");
    need(fixture_json, "out");
    *fixture_json = copy_out(dualdemo::dump(dualdemo::to_json(dualdemo::make_fixture(name, seed))));
  });
}

dd_status dd_fixture_clearance(const char* fixture_json, const char* trajectory_json, double* clearance,
                               double* radius) {
  return guard([&] {
    need(fixture_json, "fixture");
    need(clearance, "clearance");
    const auto f = dualdemo::fixture_from_json(dualdemo::parse_json(fixture_json));
    if (!f.obstacle) throw Error(ErrorCode::InvalidArgument, "fixture has no obstacle");
    *clearance = f.obstacle->clearance(operand(trajectory_json, "trajectory"));
    if (radius != nullptr) *radius = f.obstacle->radius;
  });
}

dd_status dd_server_new(const char* state_dir, dd_server** out) {
  return guard([&] {
    need(out, "out");
    auto srv = std::make_unique<dd_server>();
    srv->store = std::make_unique<dualdemo::SessionStore>(state_dir != nullptr ? state_dir : "");
    srv->http = std::make_unique<dualdemo::HttpServer>(*srv->store);
    *out = srv.release();
  });
}

dd_status dd_server_bind(dd_server* srv, const char* address, int* bound_port) {
  return guard([&] {
    need(srv, "server");
    need(address, "address");
    const auto [host, port] = dualdemo::parse_bind_address(address);
    const int bound = srv->http->bind(host, port);
    if (bound_port != nullptr) *bound_port = bound;
  });
}

dd_status dd_server_run(dd_server* srv) {
  return guard([&] {
    need(srv, "server");
    srv->http->run();
  });
}

void dd_server_stop(dd_server* srv) {
  if (srv != nullptr) srv->http->stop();
}

void dd_server_free(dd_server* srv) { delete srv; }

}  // extern "C"
