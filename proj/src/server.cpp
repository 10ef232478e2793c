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

#include "dualdemo/server.hpp"

#include <charconv>

#include "httplib.h"

#include "dualdemo/error.hpp"
#include "dualdemo/metrics.hpp"

namespace dualdemo {

namespace {

std::string_view code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::Conflict: return "conflict";
    case ErrorCode::Numeric: return "numeric";
    case ErrorCode::DegenerateFit: return "degenerate_fit";
    case ErrorCode::InsufficientData: return "insufficient_data";
    case ErrorCode::Io: return "io";
  }
  return "internal";
}

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(dump(body), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, {{"error", {{"code", std::string(code)}, {"message", message}}}});
}

Json body_json(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  return parse_json(req.body);
}

std::optional<std::uint64_t> expected_version(const httplib::Request& req) {
  if (!req.has_header("If-Match")) return std::nullopt;
  std::string v = req.get_header_value("If-Match");
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  std::uint64_t out = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  require(ec == std::errc() && end == v.data() + v.size(), ErrorCode::InvalidArgument, "If-Match must be a version number");
  return out;
}

Label label_field(const Json& body) {
  require(body.is_object() && body.contains("label") && body["label"].is_string(), ErrorCode::InvalidArgument,
          "body needs a string 'label'");
  const auto label = parse_label(body["label"].get<std::string>());
  require(label.has_value(), ErrorCode::InvalidArgument, "unknown label '" + body["label"].get<std::string>() + "'");
  return *label;
}

Trajectory metric_operand(const Json& body, const char* key) {
  require(body.is_object() && body.contains(key), ErrorCode::InvalidArgument, std::string("body needs '") + key + "'");
  const Json& v = body[key];
  if (v.is_object()) {
    require(v.contains("points"), ErrorCode::InvalidArgument, std::string("'") + key + "' needs 'points'");
    return trajectory_from_json(v["points"], key);
  }
  return trajectory_from_json(v, key);
}

void set_version(httplib::Response& res, const Session& s) {
  res.set_header("ETag", "\"" + std::to_string(s.version()) + "\"");
}

}  // namespace

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::Conflict: return 409;
    case ErrorCode::InvalidArgument:
    case ErrorCode::Parse:
    case ErrorCode::InsufficientData:
    case ErrorCode::DegenerateFit:
    case ErrorCode::Numeric: return 422;
    case ErrorCode::Io: return 500;
  }
  return 500;
}

std::pair<std::string, int> parse_bind_address(const std::string& text) {
  const auto colon = text.rfind(':');
  const std::string host = colon == std::string::npos ? "127.0.0.1" : text.substr(0, colon);
  const std::string port_text = colon == std::string::npos ? text : text.substr(colon + 1);
  int port = 0;
  const auto [end, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  require(ec == std::errc() && end == port_text.data() + port_text.size() && port >= 0 && port <= 65535,
          ErrorCode::InvalidArgument, "bad bind address '" + text + "'");
  return {host.empty() ? "127.0.0.1" : host, port};
}

struct HttpServer::Impl {
  SessionStore& store;
  httplib::Server http;

  explicit Impl(SessionStore& s) : store(s) { routes(); }

  template <typename Fn>
  httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        send_error(res, http_status(e.code()), code_name(e.code()), e.what());
      } catch (const Json::exception& e) {
        send_error(res, 422, "invalid_argument", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  std::shared_ptr<const Session> mutate(const httplib::Request& req, const SessionStore::Mutation& m) {
    return store.mutate(req.matches[1], expected_version(req), m);
  }

  void routes() {
    http.Get("/health", guarded([](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"status", "ok"}});
    }));

    http.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"sessions", store.ids()}});
    }));

    http.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const Json body = body_json(req);
      require(body.is_object(), ErrorCode::InvalidArgument, "body must be an object");
      SolverConfig cfg;
      if (body.contains("config")) cfg = config_from_json(body["config"]);
      const auto s = store.create(cfg);
      set_version(res, *s);
      send_json(res, 201, s->state_json());
    }));

    http.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto s = store.get(req.matches[1]);
      set_version(res, *s);
      send_json(res, 200, s->state_json());
    }));

    http.Post(R"(/sessions/([^/]+)/demos)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      ImportOptions opts;
      opts.smoothing_window = store.get(req.matches[1])->config().smoothing_window;
      if (req.has_param("label")) {
        opts.label = parse_label(req.get_param_value("label"));
        require(opts.label.has_value(), ErrorCode::InvalidArgument, "unknown label '" + req.get_param_value("label") + "'");
      }
      if (req.has_param("id")) opts.id = req.get_param_value("id");
      const bool csv = req.get_header_value("Content-Type").rfind("text/csv", 0) == 0;
      Demonstration demo = import_demo(req.body, csv ? "csv" : "json", opts);
      std::string id;
      const auto s = mutate(req, [&](const Session& cur) {
        Json e = cur.add_demo_event(demo);
        id = e["demo"]["id"].get<std::string>();
        return std::vector<Json>{std::move(e)};
      });
      set_version(res, *s);
      send_json(res, 201, {{"id", id}, {"version", s->version()}, {"demo", to_json(*s->demos().find(id))}});
    }));

    http.Patch(R"(/sessions/([^/]+)/demos/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const Label label = label_field(body_json(req));
      const std::string demo = req.matches[2];
      const auto s = mutate(req, [&](const Session& cur) { return std::vector<Json>{cur.relabel_event(demo, label)}; });
      set_version(res, *s);
      send_json(res, 200, {{"id", demo}, {"version", s->version()}, {"label", std::string(to_string(label))}});
    }));

    http.Delete(R"(/sessions/([^/]+)/demos/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string demo = req.matches[2];
      const auto s = mutate(req, [&](const Session& cur) { return std::vector<Json>{cur.remove_demo_event(demo)}; });
      set_version(res, *s);
      send_json(res, 200, {{"id", demo}, {"version", s->version()}, {"removed", true}});
    }));

    http.Put(R"(/sessions/([^/]+)/constraints)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const Json body = body_json(req);
      const auto s = mutate(req, [&](const Session& cur) { return cur.constraints_events(body); });
      set_version(res, *s);
      send_json(res, 200, {{"version", s->version()}, {"constraints", to_json(s->constraints())}});
    }));

    http.Put(R"(/sessions/([^/]+)/config)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const Json body = body_json(req);
      const auto s = mutate(req, [&](const Session& cur) { return std::vector<Json>{cur.config_event(body)}; });
      set_version(res, *s);
      send_json(res, 200, {{"version", s->version()}, {"config", to_json(s->config())}});
    }));

    http.Post(R"(/sessions/([^/]+)/reproduce)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto s = mutate(req, [](const Session& cur) { return std::vector<Json>{cur.reproduce_event()}; });
      set_version(res, *s);
      send_json(res, 200, s->history().back().reproduction);
    }));

    http.Post(R"(/sessions/([^/]+)/iterate)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const Label label = label_field(body_json(req));
      const std::size_t before = store.get(req.matches[1])->demos().failures().size();
      Json appended = nullptr;
      const auto s = mutate(req, [&](const Session& cur) {
        auto events = cur.iterate_events(label);
        for (const auto& e : events)
          if (e["type"] == "add_demo") appended = e["demo"]["id"];
        return events;
      });
      set_version(res, *s);
      const bool failed = label == Label::Failed;
      send_json(res, 200,
                {{"version", s->version()},
                 {"label", std::string(to_string(label))},
                 {"appended", appended},
                 {"failed_before", before},
                 {"failed_after", s->demos().failures().size()},
                 {"reproduction", failed ? s->history().back().reproduction : Json(nullptr)}});
    }));

    http.Post("/metrics", guarded([](const httplib::Request& req, httplib::Response& res) {
      const Json body = body_json(req);
      send_json(res, 200, to_json(compare(metric_operand(body, "a"), metric_operand(body, "b"))));
    }));
  }
};

HttpServer::HttpServer(SessionStore& store) : impl_(std::make_unique<Impl>(store)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->http.bind_to_any_port(host);
    require(bound > 0, ErrorCode::Io, "cannot bind " + host);
    return bound;
  }
  require(impl_->http.bind_to_port(host, port), ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::run() { impl_->http.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->http.stop();
}

void HttpServer::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace dualdemo
