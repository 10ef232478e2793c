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
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "dualdemo/io.hpp"
#include "dualdemo/solver.hpp"
#include "dualdemo/trajectory.hpp"

namespace dualdemo {

struct HistoryEntry {
  /// Response body of the reproduce call that produced this entry.
  Json reproduction;
  Trajectory trajectory;
  std::optional<Label> label;
};

/// Event-sourced session state. Every mutation is a JSON event; apply() is
/// the only way state changes, so replaying a log rebuilds the same session.
class Session {
 public:
  Session(std::string id, SolverConfig config);

  const std::string& id() const noexcept { return id_; }
  /// Number of events applied after creation.
  std::uint64_t version() const noexcept { return version_; }
  const DemonstrationSet& demos() const noexcept { return demos_; }
  const ConstraintSet& constraints() const noexcept { return constraints_; }
  const SolverConfig& config() const noexcept { return config_; }
  const std::vector<HistoryEntry>& history() const noexcept { return history_; }

  /// Throws on events that do not fit the current state; the state is left
  /// untouched in that case.
  void apply(const Json& event);
  void apply(const std::vector<Json>& events);

  // Event builders. They validate against the current state but never mutate it.
  Json add_demo_event(Demonstration demo) const;
  Json relabel_event(const std::string& demo_id, Label label) const;
  Json remove_demo_event(const std::string& demo_id) const;
  /// A "rho" key in the payload also updates the solver's rho.
  std::vector<Json> constraints_events(const Json& payload) const;
  Json config_event(const Json& patch) const;
  /// Runs the solver on the current state.
  Json reproduce_event() const;
  /// Labels the latest reproduction and, on failure, appends it to the failed
  /// set.
  std::vector<Json> label_events(Label label) const;
  /// label_events followed, on failure, by a fresh reproduction.
  std::vector<Json> iterate_events(Label label) const;

  Json create_event() const;

  /// Full state, including demo samples and history trajectories.
  Json state_json() const;
  /// Events that rebuild the current inputs (demos, constraints, config) in a
  /// fresh session.
  std::vector<Json> export_events() const;

 private:
  std::string fresh_demo_id(const std::string& prefix) const;

  std::string id_;
  std::uint64_t version_ = 0;
  DemonstrationSet demos_;
  /// Insertion order of demo ids, used for stable listings.
  std::vector<std::string> order_;
  ConstraintSet constraints_;
  SolverConfig config_;
  std::vector<HistoryEntry> history_;
};

/// Rebuilds a session from its event log (first event must be "create").
Session replay(const std::vector<Json>& events);

/// Concurrent session registry. Mutations on one session are serialized and
/// written ahead to "<dir>/<id>.jsonl" before they become visible; reads take
/// an immutable snapshot without locking the session.
class SessionStore {
 public:
  /// Memory-only when `dir` is empty; otherwise existing logs are replayed.
  explicit SessionStore(std::filesystem::path dir = {});

  std::shared_ptr<const Session> create(const SolverConfig& config);
  /// Throws NotFound for unknown ids.
  std::shared_ptr<const Session> get(const std::string& id) const;
  std::vector<std::string> ids() const;

  using Mutation = std::function<std::vector<Json>(const Session&)>;
  /// Serialized per session. Throws Conflict when `expected_version` is given
  /// and differs from the current version.
  std::shared_ptr<const Session> mutate(const std::string& id, std::optional<std::uint64_t> expected_version,
                                        const Mutation& mutation);

 private:
  struct Slot {
    std::mutex writer;
    std::shared_ptr<const Session> snapshot;
  };

  std::shared_ptr<Slot> slot(const std::string& id) const;
  void append(const std::string& id, const std::vector<Json>& events) const;
  static std::shared_ptr<const Session> load(const Slot& s);

  std::filesystem::path dir_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
};

}  // namespace dualdemo
