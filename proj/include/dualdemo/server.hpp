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

#include <memory>
#include <string>
#include <utility>

#include "dualdemo/error.hpp"
#include "dualdemo/session.hpp"

namespace dualdemo {

/// HTTP front end over a SessionStore.
///
///   POST   /sessions                       create (optional {"config": {...}})
///   GET    /sessions/{id}                  state
///   POST   /sessions/{id}/demos            TrajectoryFile JSON, or CSV with ?label=
///   PATCH  /sessions/{id}/demos/{demo}     {"label": ...}
///   DELETE /sessions/{id}/demos/{demo}
///   PUT    /sessions/{id}/constraints      {"rho"?: r, "entries": [...]}
///   PUT    /sessions/{id}/config           partial SolverConfig
///   POST   /sessions/{id}/reproduce
///   POST   /sessions/{id}/iterate          {"label": ...}
///   POST   /metrics                        {"a": points, "b": points}
///
/// Mutations honour an optional If-Match version header (409 on mismatch).
class HttpServer {
 public:
  explicit HttpServer(SessionStore& store);
  ~HttpServer();

  /// Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void run();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// HTTP status for a library error code.
int http_status(ErrorCode code) noexcept;

/// Splits "host:port"; a bare port binds 127.0.0.1.
std::pair<std::string, int> parse_bind_address(const std::string& text);

}  // namespace dualdemo
