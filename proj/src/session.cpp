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

#include "dualdemo/session.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "dualdemo/error.hpp"

namespace dualdemo {

namespace {

const std::string& field_string(const Json& e, const char* key) {
  if (!e.contains(key) || !e[key].is_string())
    throw Error(ErrorCode::InvalidArgument, std::string("event field '") + key + "' must be a string");
  return e[key].get_ref<const std::string&>();
}

Label field_label(const Json& e) {
  const auto label = parse_label(field_string(e, "label"));
  require(label.has_value(), ErrorCode::InvalidArgument, "unknown label '" + field_string(e, "label") + "'");
  return *label;
}

ImportOptions raw_import() {
  ImportOptions opts;
  opts.smoothing_window = 1;
  return opts;
}

std::string random_id() {
  static thread_local std::mt19937_64 gen{std::random_device{}()};
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << gen();
  return out.str();
}

}  // namespace

Session::Session(std::string id, SolverConfig config) : id_(std::move(id)), config_(std::move(config)) {
  constraints_.rho = config_.rho;
}

void Session::apply(const Json& event) { apply(std::vector<Json>{event}); }

void Session::apply(const std::vector<Json>& events) {
  Session next = *this;
  for (const auto& e : events) {
    if (!e.is_object()) throw Error(ErrorCode::InvalidArgument, "event must be an object");
    const std::string& type = field_string(e, "type");
    if (type == "add_demo") {
      require(e.contains("demo"), ErrorCode::InvalidArgument, "add_demo event needs 'demo'");
      Demonstration demo = import_demo_json(e["demo"], raw_import());
      const std::string id = demo.id;
      next.demos_.add(std::move(demo));
      next.order_.push_back(id);
    } else if (type == "relabel") {
      const std::string& id = field_string(e, "id");
      require(next.demos_.relabel(id, field_label(e)), ErrorCode::NotFound, "unknown demo '" + id + "'");
    } else if (type == "remove_demo") {
      const std::string& id = field_string(e, "id");
      require(next.demos_.remove(id), ErrorCode::NotFound, "unknown demo '" + id + "'");
      next.order_.erase(std::find(next.order_.begin(), next.order_.end(), id));
    } else if (type == "set_constraints") {
      require(e.contains("constraints"), ErrorCode::InvalidArgument, "set_constraints event needs 'constraints'");
      ConstraintSet cs = constraints_from_json(e["constraints"], next.config_.rho);
      cs.rho = next.config_.rho;
      const auto dim = next.demos_.dim();
      const std::size_t n = dim ? *dim : (cs.entries.empty() ? 1 : static_cast<std::size_t>(cs.entries.front().target.size()));
      cs.validate(next.config_.length, n);
      next.constraints_ = std::move(cs);
    } else if (type == "set_config") {
      require(e.contains("config"), ErrorCode::InvalidArgument, "set_config event needs 'config'");
      next.config_ = config_from_json(e["config"], next.config_);
      next.constraints_.rho = next.config_.rho;
    } else if (type == "reproduce") {
      require(e.contains("reproduction") && e["reproduction"].contains("trajectory"), ErrorCode::InvalidArgument,
              "reproduce event needs a reproduction");
      next.history_.push_back({e["reproduction"], trajectory_from_json(e["reproduction"]["trajectory"], "trajectory"),
                               std::nullopt});
    } else if (type == "label") {
      require(e.contains("index") && e["index"].is_number_unsigned(), ErrorCode::InvalidArgument,
              "label event needs 'index'");
      const auto index = e["index"].get<std::size_t>();
      require(index + 1 == next.history_.size(), ErrorCode::Conflict, "only the latest reproduction can be labeled");
      require(!next.history_[index].label.has_value(), ErrorCode::Conflict, "reproduction is already labeled");
      next.history_[index].label = field_label(e);
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown event type '" + type + "'");
    }
    ++next.version_;
  }
  *this = std::move(next);
}

std::string Session::fresh_demo_id(const std::string& prefix) const {
  for (std::size_t n = demos_.size() + 1;; ++n) {
    std::string id = prefix + "-" + std::to_string(n);
    if (demos_.find(id) == nullptr) return id;
  }
}

Json Session::add_demo_event(Demonstration demo) const {
  if (demo.id.empty()) demo.id = fresh_demo_id("demo");
  require(demos_.find(demo.id) == nullptr, ErrorCode::Conflict, "duplicate demonstration id '" + demo.id + "'");
  return {{"type", "add_demo"}, {"demo", to_json(demo)}};
}

Json Session::relabel_event(const std::string& demo_id, Label label) const {
  require(demos_.find(demo_id) != nullptr, ErrorCode::NotFound, "unknown demo '" + demo_id + "'");
  return {{"type", "relabel"}, {"id", demo_id}, {"label", std::string(to_string(label))}};
}

Json Session::remove_demo_event(const std::string& demo_id) const {
  require(demos_.find(demo_id) != nullptr, ErrorCode::NotFound, "unknown demo '" + demo_id + "'");
  return {{"type", "remove_demo"}, {"id", demo_id}};
}

std::vector<Json> Session::constraints_events(const Json& payload) const {
  std::vector<Json> events;
  const ConstraintSet cs = constraints_from_json(payload, config_.rho);
  if (payload.contains("rho")) events.push_back({{"type", "set_config"}, {"config", {{"rho", cs.rho}}}});
  Json body = to_json(cs);
  body.erase("rho");
  events.push_back({{"type", "set_constraints"}, {"constraints", std::move(body)}});
  return events;
}

Json Session::config_event(const Json& patch) const {
  const SolverConfig cfg = config_from_json(patch, config_);
  return {{"type", "set_config"}, {"config", to_json(cfg)}};
}

Json Session::reproduce_event() const {
  require(!demos_.empty(), ErrorCode::InsufficientData, "session has no demonstrations");
  return {{"type", "reproduce"}, {"reproduction", to_json(reproduce(demos_, constraints_, config_))}};
}

std::vector<Json> Session::label_events(Label label) const {
  require(!history_.empty(), ErrorCode::Conflict, "no reproduction to label; reproduce first");
  require(!history_.back().label.has_value(), ErrorCode::Conflict, "the latest reproduction is already labeled");
  std::vector<Json> events;
  events.push_back({{"type", "label"}, {"index", history_.size() - 1}, {"label", std::string(to_string(label))}});
  if (label == Label::Failed)
    events.push_back(add_demo_event({fresh_demo_id("refine"), history_.back().trajectory, Label::Failed}));
  return events;
}

std::vector<Json> Session::iterate_events(Label label) const {
  std::vector<Json> events = label_events(label);
  if (label == Label::Failed) {
    Session next = *this;
    next.apply(events);
    events.push_back(next.reproduce_event());
  }
  return events;
}

Json Session::create_event() const { return {{"type", "create"}, {"id", id_}, {"config", to_json(config_)}}; }

Json Session::state_json() const {
  Json demos = Json::array();
  for (const auto& id : order_) demos.push_back(to_json(*demos_.find(id)));
  Json history = Json::array();
  for (std::size_t i = 0; i < history_.size(); ++i) {
    const auto& h = history_[i];
    history.push_back({{"index", i},
                       {"label", h.label ? Json(std::string(to_string(*h.label))) : Json(nullptr)},
                       {"status", h.reproduction["report"]["status"]},
                       {"max_residual", h.reproduction["report"]["max_residual"]},
                       {"trajectory", h.reproduction["trajectory"]}});
  }
  Json cs = to_json(constraints_);
  return {{"id", id_},
          {"version", version_},
          {"config", to_json(config_)},
          {"constraints", std::move(cs)},
          {"demos", std::move(demos)},
          {"counts", {{"success", demos_.successes().size()}, {"failure", demos_.failures().size()}}},
          {"history", std::move(history)}};
}

std::vector<Json> Session::export_events() const {
  std::vector<Json> events{create_event()};
  for (const auto& id : order_) events.push_back({{"type", "add_demo"}, {"demo", to_json(*demos_.find(id))}});
  Json cs = to_json(constraints_);
  cs.erase("rho");
  events.push_back({{"type", "set_constraints"}, {"constraints", std::move(cs)}});
  return events;
}

Session replay(const std::vector<Json>& events) {
  require(!events.empty() && events.front().is_object() && events.front().value("type", "") == "create",
          ErrorCode::Parse, "session log must start with a create event");
  const Json& first = events.front();
  require(first.contains("config"), ErrorCode::Parse, "create event needs 'config'");
  Session s(field_string(first, "id"), config_from_json(first["config"]));
  s.apply(std::vector<Json>(events.begin() + 1, events.end()));
  return s;
}

SessionStore::SessionStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (dir_.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  require(!ec, ErrorCode::Io, "cannot create state directory " + dir_.string() + ": " + ec.message());
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.path().extension() != ".jsonl") continue;
    std::ifstream in(entry.path());
    std::vector<Json> events;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        events.push_back(Json::parse(line));
      } catch (const Json::parse_error&) {
        // A torn final write from a crash; everything before it is intact.
        break;
      }
    }
    if (events.empty()) continue;
    auto s = std::make_shared<Slot>();
    Session session = replay(events);
    const std::string id = session.id();
    s->snapshot = std::make_shared<const Session>(std::move(session));
    sessions_[id] = std::move(s);
  }
}

std::shared_ptr<const Session> SessionStore::load(const Slot& s) { return std::atomic_load(&s.snapshot); }

std::shared_ptr<SessionStore::Slot> SessionStore::slot(const std::string& id) const {
  std::shared_lock lock(map_mutex_);
  const auto it = sessions_.find(id);
  require(it != sessions_.end(), ErrorCode::NotFound, "unknown session '" + id + "'");
  return it->second;
}

void SessionStore::append(const std::string& id, const std::vector<Json>& events) const {
  if (dir_.empty()) return;
  const auto path = dir_ / (id + ".jsonl");
  std::string text;
  for (const auto& e : events) text += e.dump() + "\n";
  std::FILE* f = std::fopen(path.c_str(), "ab");
  require(f != nullptr, ErrorCode::Io, "cannot open " + path.string());
  const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size() && std::fflush(f) == 0 &&
                  ::fsync(::fileno(f)) == 0;
  std::fclose(f);
  require(ok, ErrorCode::Io, "cannot write " + path.string());
}

std::shared_ptr<const Session> SessionStore::create(const SolverConfig& config) {
  std::string id;
  {
    std::shared_lock lock(map_mutex_);
    do id = random_id();
    while (sessions_.count(id) != 0);
  }
  auto session = std::make_shared<const Session>(id, config);
  append(id, {session->create_event()});
  auto s = std::make_shared<Slot>();
  s->snapshot = session;
  std::unique_lock lock(map_mutex_);
  sessions_[id] = std::move(s);
  return session;
}

std::shared_ptr<const Session> SessionStore::get(const std::string& id) const { return load(*slot(id)); }

std::vector<std::string> SessionStore::ids() const {
  std::shared_lock lock(map_mutex_);
  std::vector<std::string> out;
  for (const auto& [id, s] : sessions_) out.push_back(id);
  return out;
}

std::shared_ptr<const Session> SessionStore::mutate(const std::string& id, std::optional<std::uint64_t> expected_version,
                                                    const Mutation& mutation) {
  const auto s = slot(id);
  std::lock_guard lock(s->writer);
  const auto current = load(*s);
  require(!expected_version || *expected_version == current->version(), ErrorCode::Conflict,
          "session version is " + std::to_string(current->version()) + ", expected " +
              std::to_string(expected_version.value_or(0)));
  const std::vector<Json> events = mutation(*current);
  if (events.empty()) return current;
  auto next = std::make_shared<Session>(*current);
  next->apply(events);
  append(id, events);
  std::shared_ptr<const Session> published = std::move(next);
  std::atomic_store(&s->snapshot, published);
  return published;
}

}  // namespace dualdemo
