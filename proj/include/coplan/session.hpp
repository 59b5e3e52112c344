// Copyright 2026 The coplan Authors
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

// Live cooperation sessions, independent of any transport. A client plays the
// human; robot suggestions are executed server-side by a simulated robot.
// Wire format: docs/protocol.md.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "coplan/cooperation_model.hpp"
#include "coplan/sim_agents.hpp"
#include "coplan/task_manager.hpp"
#include "coplan/virtual_time.hpp"

namespace coplan {

inline constexpr std::string_view kProtocolVersion = "coplan-proto/1";

/// Source of time and deferred work for sessions.
class Scheduler {
 public:
  using TimerId = std::uint64_t;

  virtual ~Scheduler() = default;
  virtual Tick now() const = 0;
  /// Runs `fn` once after `delay`, unless cancelled first. Must not invoke
  /// `fn` synchronously.
  virtual TimerId call_after(Tick delay, std::function<void()> fn) = 0;
  virtual void cancel(TimerId id) = 0;
};

/// Time only moves when told to; for tests and offline replay.
class ManualScheduler final : public Scheduler {
 public:
  Tick now() const override;
  TimerId call_after(Tick delay, std::function<void()> fn) override;
  void cancel(TimerId id) override;

  /// Moves time forward, firing due timers in (time, creation) order.
  void advance(Tick delta);
  void advance_to(Tick t);
  /// Fires timers until none are left; returns how many ran.
  std::size_t run_all();
  std::size_t pending() const;
  std::optional<Tick> next_due() const;

 private:
  bool fire_next(Tick limit);

  mutable std::mutex mu_;
  Tick now_ = 0;
  TimerId next_id_ = 1;
  std::map<std::pair<Tick, TimerId>, std::function<void()>> timers_;
};

/// One protocol frame. `seq` on outbound frames is the session's message
/// counter; on inbound frames it names the suggestion being answered.
struct Message {
  std::string kind;
  std::string session;
  std::uint64_t seq = 0;
  nlohmann::json payload = nlohmann::json::object();

  /// Compact JSON with sorted keys and no newlines.
  std::string dump() const;
  /// Throws ProtocolViolation on malformed frames.
  static Message parse(std::string_view frame);
};

struct SessionOptions {
  GraphSpec model;
  RobotModel robot;
  /// Wall time per nominal robot second.
  double robot_time_scale = 0.1;
  double human_timeout_s = 120.0;
  std::uint64_t seed = 0;
  /// When set, the journal is also appended to <dir>/<id>.jsonl.
  std::filesystem::path journal_dir;
};

/// A single cooperation run driven by client events. Thread-safe: every
/// event, timer and query goes through one mutex, which gives the total order.
class Session : public std::enable_shared_from_this<Session> {
 public:
  using Sink = std::function<void(const std::string& frame)>;
  using SubscriberId = std::uint64_t;

  static std::shared_ptr<Session> create(std::string id, SessionOptions options,
                                         std::shared_ptr<Scheduler> scheduler);
  /// Rebuilds a session from its journal without running any timers.
  static std::shared_ptr<Session> replay(std::span<const nlohmann::json> journal);
  static std::vector<nlohmann::json> read_journal(const std::filesystem::path& file);

  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const { return id_; }

  /// Registers a client; it immediately receives the current state and, if
  /// one is pending, the open suggestion.
  SubscriberId subscribe(Sink sink);
  void unsubscribe(SubscriberId id);

  /// Applies a client event and broadcasts the result. Throws on rejection;
  /// the state is then unchanged.
  void apply(const Message& inbound);
  /// Transport entry point: parses, applies, and reports rejections to the
  /// sender as an "error" frame instead of throwing.
  void handle_frame(std::string_view frame, SubscriberId from);

  nlohmann::json snapshot() const;
  std::string snapshot_text() const { return snapshot().dump(); }
  std::vector<nlohmann::json> journal() const;
  /// Copy of the current graph state.
  AndOrGraph graph() const;
  bool finished() const;
  /// Stops timers and refuses further use with SessionClosed.
  void close();

 private:
  struct Private {};

 public:
  Session(Private, std::string id, SessionOptions options, std::shared_ptr<Scheduler> scheduler);

 private:
  void start_locked();
  void apply_entry_locked(const nlohmann::json& entry);
  void commit_locked(nlohmann::json entry, std::optional<std::uint64_t> previous_pending);
  void arm_timers_locked();
  void cancel_timers_locked();
  void on_robot_done(std::uint64_t seq, Outcome outcome);
  void on_timeout(std::uint64_t seq);
  void check_open_locked() const;
  nlohmann::json snapshot_locked() const;
  nlohmann::json suggestion_json(const Suggestion& s) const;
  nlohmann::json metrics_locked() const;
  std::string frame_locked(std::string kind, nlohmann::json payload);
  void broadcast_locked(const std::string& frame);
  Tick planner_clock();

  mutable std::mutex mu_;
  std::string id_;
  SessionOptions options_;
  std::shared_ptr<Scheduler> scheduler_;
  bool replaying_ = false;
  std::optional<TaskManager> manager_;
  Rng robot_rng_;

  // Planner timestamps: latched at the first read while handling an event.
  std::optional<Tick> planner_now_;
  std::optional<Tick> replay_planner_now_;

  std::string status_ = "in_progress";
  std::string failure_reason_;
  Tick t_h_ = 0;
  Tick t_r_ = 0;
  bool closed_ = false;

  std::vector<nlohmann::json> journal_;
  std::ofstream journal_file_;
  std::uint64_t out_seq_ = 0;
  SubscriberId next_subscriber_ = 1;
  std::map<SubscriberId, Sink> subscribers_;
  std::optional<Scheduler::TimerId> robot_timer_;
  std::optional<Scheduler::TimerId> human_timer_;
};

struct ServiceOptions {
  /// Root for relative model paths in create requests.
  std::filesystem::path model_dir;
  std::filesystem::path journal_dir;
  double robot_time_scale = 0.1;
  double human_timeout_s = 120.0;
};

/// Creates and looks up sessions by id.
class SessionRegistry {
 public:
  SessionRegistry(ServiceOptions options, std::shared_ptr<Scheduler> scheduler);

  /// Request fields: model (required; {"path"}, {"palletize"} or
  /// {"inline"}), robot, robot_time_scale, human_timeout, seed.
  /// Throws ModelNotFound, ModelInvalid or ConfigError.
  std::shared_ptr<Session> create(const nlohmann::json& request);
  /// Throws UnknownSession.
  std::shared_ptr<Session> find(const std::string& id) const;
  std::size_t size() const;

 private:
  std::string fresh_id_locked();

  ServiceOptions options_;
  std::shared_ptr<Scheduler> scheduler_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t id_state_;
};

/// Resolves a create-request model reference. Throws ModelNotFound or ModelInvalid.
GraphSpec resolve_model(const nlohmann::json& ref, const std::filesystem::path& model_dir);

}  // namespace coplan
