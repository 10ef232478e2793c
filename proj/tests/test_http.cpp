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
#include <gtest/gtest.h>

#include <filesystem>
#include <memory>
#include <thread>

#include "dualdemo/fixtures.hpp"
#include "dualdemo/io.hpp"
#include "dualdemo/server.hpp"
#include "dualdemo/session.hpp"

// After Eigen: resolv.h defines _res, which Eigen uses as a parameter name.
#include "httplib.h"

namespace dualdemo {
namespace {

/// Store plus server on an ephemeral port, torn down in reverse order.
struct Running {
  explicit Running(const std::filesystem::path& dir = {}) : store(dir), server(store) {
    port = server.bind("127.0.0.1", 0);
    thread = std::thread([this] { server.run(); });
    server.wait_until_ready();
  }
  ~Running() {
    server.stop();
    thread.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(120, 0);
    return c;
  }

  SessionStore store;
  HttpServer server;
  int port = 0;
  std::thread thread;
};

Json body(const httplib::Result& r) {
  EXPECT_TRUE(r);
  return r ? parse_json(r->body) : Json();
}

std::string create(httplib::Client& c, const Json& config = Json::object()) {
  const auto r = c.Post("/sessions", dump(Json{{"config", config}}), "application/json");
  EXPECT_EQ(r->status, 201);
  return body(r)["id"].get<std::string>();
}

void post_fixture(httplib::Client& c, const std::string& id, const Fixture& f) {
  for (const auto& d : f.demos) {
    const auto r = c.Post("/sessions/" + id + "/demos", dump(to_json(d)), "application/json");
    ASSERT_EQ(r->status, 201) << r->body;
  }
  ASSERT_EQ(c.Put("/sessions/" + id + "/constraints", dump(to_json(f.constraints)), "application/json")->status, 200);
}

std::string fixture_session(httplib::Client& c, const std::string& name) {
  const auto f = make_fixture(name, 7);
  const auto id = create(c, to_json(f.config));
  post_fixture(c, id, f);
  return id;
}

TEST(Http, HealthAndListing) {
  Running srv;
  auto c = srv.client();
  EXPECT_EQ(body(c.Get("/health"))["status"], "ok");
  const auto id = create(c);
  EXPECT_EQ(body(c.Get("/sessions"))["sessions"], Json::array({id}));
  const auto state = body(c.Get("/sessions/" + id));
  EXPECT_EQ(state["version"], 0);
  EXPECT_EQ(state["counts"]["success"], 0);
}

TEST(Http, ErrorStatuses) {
  Running srv;
  auto c = srv.client();
  const auto missing = c.Get("/sessions/nope");
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(body(missing)["error"]["code"], "not_found");
  EXPECT_EQ(c.Post("/sessions/nope/reproduce", "", "application/json")->status, 404);

  const auto id = create(c);
  const auto path = "/sessions/" + id;
  EXPECT_EQ(c.Post("/sessions", "{bad", "application/json")->status, 422);
  EXPECT_EQ(c.Post(path + "/demos", R"({"dim":1,"points":[[0],[1,2]],"label":"success"})", "application/json")->status, 422);
  EXPECT_EQ(c.Post(path + "/demos", R"({"dim":1,"points":[[0],[1]]})", "application/json")->status, 422);
  EXPECT_EQ(c.Put(path + "/config", R"({"lambda":-1})", "application/json")->status, 422);
  EXPECT_EQ(c.Put(path + "/config", R"({"colour":1})", "application/json")->status, 422);
  EXPECT_EQ(c.Post(path + "/reproduce", "", "application/json")->status, 422);
  EXPECT_EQ(c.Patch(path + "/demos/ghost", R"({"label":"failure"})", "application/json")->status, 404);
  EXPECT_EQ(c.Post(path + "/iterate", R"({"label":"sideways"})", "application/json")->status, 422);
  EXPECT_EQ(c.Post("/metrics", R"({"a":[[0,0],[1,1]]})", "application/json")->status, 422);
  EXPECT_EQ(body(c.Get(path))["version"], 0);
}

TEST(Http, VersionConflict) {
  Running srv;
  auto c = srv.client();
  const auto id = create(c);
  const auto path = "/sessions/" + id + "/config";
  const httplib::Headers stale{{"If-Match", "\"0\""}};
  const auto ok = c.Put(path, stale, R"({"lambda":2})", "application/json");
  EXPECT_EQ(ok->status, 200);
  EXPECT_EQ(ok->get_header_value("ETag"), "\"1\"");
  const auto clash = c.Put(path, stale, R"({"lambda":3})", "application/json");
  EXPECT_EQ(clash->status, 409);
  EXPECT_EQ(body(clash)["error"]["code"], "conflict");
  EXPECT_EQ(body(c.Get("/sessions/" + id))["config"]["lambda"], 2.0);
}

TEST(Http, DemoLifecycle) {
  Running srv;
  auto c = srv.client();
  const auto id = create(c);
  const auto path = "/sessions/" + id;
  const auto added = c.Post(path + "/demos", R"({"dim":1,"points":[[0],[1]],"label":"success","id":"d1"})", "application/json");
  EXPECT_EQ(added->status, 201);
  EXPECT_EQ(body(added)["id"], "d1");
  EXPECT_EQ(body(c.Get(path))["counts"]["success"], 1);

  const auto csv = c.Post(path + "/demos?label=failure&id=c1", "x1\n0\n0.5\n1\n", "text/csv");
  EXPECT_EQ(csv->status, 201) << csv->body;
  EXPECT_EQ(body(csv)["demo"]["label"], "failure");
  EXPECT_EQ(body(csv)["demo"]["dim"], 1);
  EXPECT_EQ(c.Post(path + "/demos?label=failure", "x1,x2\n0,0\n1,1\n", "text/csv")->status, 422);

  EXPECT_EQ(c.Patch(path + "/demos/d1", R"({"label":"failure"})", "application/json")->status, 200);
  const auto state = body(c.Get(path));
  EXPECT_EQ(state["counts"]["success"], 0);
  EXPECT_EQ(state["counts"]["failure"], 2);
  EXPECT_EQ(c.Delete(path + "/demos/c1")->status, 200);
  EXPECT_EQ(c.Delete(path + "/demos/c1")->status, 404);
  EXPECT_EQ(body(c.Get(path))["demos"].size(), 1u);
}

TEST(Http, ReproduceOneDemoWithEndpoints) {
  Running srv;
  auto c = srv.client();
  const auto id = create(c, Json{{"length", 40}});
  const auto path = "/sessions/" + id;
  Json pts = Json::array();
  for (int i = 0; i < 30; ++i) pts.push_back({i / 29.0, 0.3 * std::sin(3.14159 * i / 29.0)});
  ASSERT_EQ(c.Post(path + "/demos", dump(Json{{"dim", 2}, {"points", pts}, {"label", "success"}}), "application/json")->status, 201);
  ASSERT_EQ(c.Put(path + "/constraints",
                  R"({"rho":1e-6,"entries":[{"index":0,"target":[0,0]},{"index":39,"target":[1,0]}]})", "application/json")
                ->status,
            200);
  const auto r = c.Post(path + "/reproduce", "", "application/json");
  ASSERT_EQ(r->status, 200) << r->body;
  const auto rep = body(r);
  EXPECT_EQ(rep["trajectory"].size(), 40u);
  EXPECT_TRUE(rep["report"].contains("max_residual"));
  EXPECT_LT(rep["report"]["max_residual"].get<double>(), 1e-2);
  EXPECT_TRUE(rep["costs"].contains("total"));
  EXPECT_FALSE(rep["models"].empty());
  EXPECT_EQ(body(c.Get(path))["history"].size(), 1u);
}

TEST(Http, ReproduceIsIdempotent) {
  Running srv;
  auto c = srv.client();
  const auto id = fixture_session(c, "reaching-obstacle");
  const auto a = c.Post("/sessions/" + id + "/reproduce", "", "application/json");
  const auto b = c.Post("/sessions/" + id + "/reproduce", "", "application/json");
  ASSERT_EQ(a->status, 200);
  EXPECT_EQ(a->body, b->body);
}

TEST(Http, IterateFailureGrowsFailedSet) {
  Running srv;
  auto c = srv.client();
  const auto id = fixture_session(c, "iterate-obstacle");
  const auto path = "/sessions/" + id;
  EXPECT_EQ(c.Post(path + "/iterate", R"({"label":"failure"})", "application/json")->status, 409);
  ASSERT_EQ(c.Post(path + "/reproduce", "", "application/json")->status, 200);
  const auto before = body(c.Get(path))["counts"]["failure"].get<int>();
  for (int round = 0; round < 3; ++round) {
    const auto r = body(c.Post(path + "/iterate", R"({"label":"failure"})", "application/json"));
    EXPECT_EQ(r["failed_after"].get<int>(), r["failed_before"].get<int>() + 1);
    EXPECT_FALSE(r["reproduction"].is_null());
    EXPECT_FALSE(r["appended"].is_null());
  }
  const auto state = body(c.Get(path));
  EXPECT_EQ(state["counts"]["failure"].get<int>(), before + 3);
  ASSERT_EQ(state["history"].size(), 4u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(state["history"][i]["label"], "failure");
  const auto stop = body(c.Post(path + "/iterate", R"({"label":"success"})", "application/json"));
  EXPECT_TRUE(stop["reproduction"].is_null());
  EXPECT_EQ(stop["failed_after"], stop["failed_before"]);
}

TEST(Http, RelabelRefitsModels) {
  Running srv;
  auto c = srv.client();
  const auto id = fixture_session(c, "reaching-obstacle");
  const auto path = "/sessions/" + id;
  const auto first = body(c.Post(path + "/reproduce", "", "application/json"));
  ASSERT_EQ(c.Patch(path + "/demos/success-1", R"({"label":"failure"})", "application/json")->status, 200);
  const auto second = body(c.Post(path + "/reproduce", "", "application/json"));
  EXPECT_NE(dump(first["models"][0]["success_mean"]), dump(second["models"][0]["success_mean"]));
  EXPECT_NE(dump(first["models"][0]["failure_mean"]), dump(second["models"][0]["failure_mean"]));
}

TEST(Http, Metrics) {
  Running srv;
  auto c = srv.client();
  const auto r = body(c.Post("/metrics", R"({"a":[[0,0],[1,0],[2,0]],"b":{"points":[[0,1],[1,1],[2,1]]}})", "application/json"));
  EXPECT_NEAR(r["sse"].get<double>(), 3.0, 1e-12);
  EXPECT_NEAR(r["sea"].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(r["crv"].get<double>(), 0.0, 1e-12);
}

TEST(Http, StateSurvivesRestart) {
  const auto dir = std::filesystem::temp_directory_path() / "dualdemo-http-restart";
  std::filesystem::remove_all(dir);
  std::string id, state;
  {
    Running srv(dir);
    auto c = srv.client();
    id = fixture_session(c, "reaching-obstacle");
    ASSERT_EQ(c.Post("/sessions/" + id + "/reproduce", "", "application/json")->status, 200);
    state = c.Get("/sessions/" + id)->body;
  }
  {
    Running srv(dir);
    auto c = srv.client();
    EXPECT_EQ(c.Get("/sessions/" + id)->body, state);
  }
  std::filesystem::remove_all(dir);
}

TEST(Http, BindAddressParsing) {
  EXPECT_EQ(parse_bind_address("8080"), std::make_pair(std::string("127.0.0.1"), 8080));
  EXPECT_EQ(parse_bind_address("0.0.0.0:9000"), std::make_pair(std::string("0.0.0.0"), 9000));
  EXPECT_THROW(parse_bind_address("host:port"), Error);
  EXPECT_THROW(parse_bind_address("70000"), Error);
}

}  // namespace
}  // namespace dualdemo
