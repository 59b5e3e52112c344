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

#include "coplan/session.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include "coplan/error.hpp"
#include "coplan/sim_engine.hpp"

namespace coplan {

using nlohmann::json;

// ---------------------------------------------------------------------------
// ManualScheduler

Tick ManualScheduler::now() const {
  std::lock_guard lock(mu_);
  return now_;
}

Scheduler::TimerId ManualScheduler::call_after(Tick delay, std::function<void()> fn) {
  std::lock_guard lock(mu_);
  const TimerId id = next_id_++;
  timers_.emplace(std::pair{now_ + std::max<Tick>(delay, 0), id}, std::move(fn));
  return id;
}

void ManualScheduler::cancel(TimerId id) {
  std::lock_guard lock(mu_);
  std::erase_if(timers_, [id](const auto& kv) { return kv.first.second == id; });
}

// Callbacks run without the scheduler lock held; they may schedule more work.
bool ManualScheduler::fire_next(Tick limit) {
  std::function<void()> fn;
  {
    std::lock_guard lock(mu_);
    if (timers_.empty() || timers_.begin()->first.first > limit) return false;
    auto it = timers_.begin();
    now_ = std::max(now_, it->first.first);
    fn = std::move(it->second);
    timers_.erase(it);
  }
  fn();
  return true;
}

void ManualScheduler::advance_to(Tick t) {
  while (fire_next(t)) {
  }
  std::lock_guard lock(mu_);
  now_ = std::max(now_, t);
}

void ManualScheduler::advance(Tick delta) { advance_to(now() + delta); }

std::size_t ManualScheduler::run_all() {
  std::size_t n = 0;
  while (fire_next(std::numeric_limits<Tick>::max())) ++n;
  return n;
}

std::size_t ManualScheduler::pending() const {
  std::lock_guard lock(mu_);
  return timers_.size();
}

std::optional<Tick> ManualScheduler::next_due() const {
  std::lock_guard lock(mu_);
  if (timers_.empty()) return std::nullopt;
  return timers_.begin()->first.first;
}

// ---------------------------------------------------------------------------
// Message

std::string Message::dump() const {
  json j = {{"kind", kind}, {"session", session}, {"seq", seq}, {"payload", payload}};
  return j.dump();
}

Message Message::parse(std::string_view frame) {
  json j;
  try {
    j = json::parse(frame);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ProtocolViolation, std::string("frame is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ProtocolViolation, "frame must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "kind" && key != "session" && key != "seq" && key != "payload") {
      throw Error(ErrorCode::ProtocolViolation, "unknown frame field '" + key + "'");
    }
  }
  if (!j.contains("kind") || !j["kind"].is_string()) {
    throw Error(ErrorCode::ProtocolViolation, "frame needs a string 'kind'");
  }
  if (!j.contains("session") || !j["session"].is_string()) {
    throw Error(ErrorCode::ProtocolViolation, "frame needs a string 'session'");
  }
  if (!j.contains("seq") || !j["seq"].is_number_unsigned()) {
    throw Error(ErrorCode::ProtocolViolation, "frame needs a non-negative integer 'seq'");
  }
  Message m;
  m.kind = j["kind"].get<std::string>();
  m.session = j["session"].get<std::string>();
  m.seq = j["seq"].get<std::uint64_t>();
  if (j.contains("payload")) {
    if (!j["payload"].is_object()) throw Error(ErrorCode::ProtocolViolation, "'payload' must be an object");
    m.payload = j["payload"];
  }
  return m;
}

// ---------------------------------------------------------------------------
// Session

namespace {

std::vector<std::string> names_of(const AndOrGraph& g, std::span<const ArcId> arcs) {
  std::vector<std::string> out;
  for (ArcId a : arcs) out.push_back(g.arc(a).name);
  return out;
}

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

Outcome parse_outcome(const json& payload) {
  if (!payload.contains("outcome")) return Outcome::Success;
  const auto& o = payload["outcome"];
  if (o == "success") return Outcome::Success;
  if (o == "failure") return Outcome::Failure;
  throw Error(ErrorCode::ProtocolViolation, "outcome must be \"success\" or \"failure\"");
}

// Manager rejections surface to clients as one code.
[[noreturn]] void rethrow_as_transition(const Error& e) {
  switch (e.code()) {
    case ErrorCode::StaleSeq:
      throw;
    default:
      throw Error(ErrorCode::InvalidTransition, e.what());
  }
}

}  // namespace

Session::Session(Private, std::string id, SessionOptions options, std::shared_ptr<Scheduler> scheduler)
    : id_(std::move(id)),
      options_(std::move(options)),
      scheduler_(std::move(scheduler)),
      robot_rng_(derive_seed(options_.seed, 2)) {}

Session::~Session() {
  if (scheduler_) {
    if (robot_timer_) scheduler_->cancel(*robot_timer_);
    if (human_timer_) scheduler_->cancel(*human_timer_);
  }
}

std::shared_ptr<Session> Session::create(std::string id, SessionOptions options,
                                         std::shared_ptr<Scheduler> scheduler) {
  if (!(options.robot_time_scale >= 0.0) || !(options.human_timeout_s > 0.0)) {
    throw Error(ErrorCode::ConfigError, "time scale must be >= 0 and timeout > 0");
  }
  validate(options.robot);
  std::optional<AndOrGraph> graph;
  try {
    graph.emplace(load_graph(options.model));
  } catch (const Error& e) {
    throw Error(ErrorCode::ModelInvalid, e.what());
  }
  auto s = std::make_shared<Session>(Private{}, std::move(id), std::move(options), std::move(scheduler));
  std::lock_guard lock(s->mu_);
  s->manager_.emplace(std::move(*graph), [raw = s.get()] { return raw->planner_clock(); });
  if (!s->options_.journal_dir.empty()) {
    const auto path = s->options_.journal_dir / (s->id_ + ".jsonl");
    s->journal_file_.open(path, std::ios::app);
    if (!s->journal_file_) throw Error(ErrorCode::IoError, "cannot open journal '" + path.string() + "'");
  }
  s->start_locked();
  return s;
}

std::shared_ptr<Session> Session::replay(std::span<const json> journal) {
  if (journal.empty() || journal.front().value("event", "") != "create") {
    throw Error(ErrorCode::ProtocolViolation, "journal must begin with a create entry");
  }
  const json& head = journal.front();
  SessionOptions o;
  try {
    o.model = parse_model(head.at("model").dump());
    o.robot_time_scale = head.at("robot_time_scale").get<double>();
    o.human_timeout_s = to_seconds(head.at("human_timeout_us").get<Tick>());
    o.seed = head.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ProtocolViolation, std::string("bad create entry: ") + e.what());
  }
  auto s = std::make_shared<Session>(Private{}, head.at("session").get<std::string>(), std::move(o),
                                     std::make_shared<ManualScheduler>());
  std::lock_guard lock(s->mu_);
  s->replaying_ = true;
  s->manager_.emplace(load_graph(s->options_.model), [raw = s.get()] { return raw->planner_clock(); });
  s->replay_planner_now_ = head.value("planner_t", head.at("t").get<Tick>());
  s->start_locked();
  s->journal_.push_back(head);
  for (std::size_t i = 1; i < journal.size(); ++i) {
    s->replay_planner_now_ = journal[i].contains("planner_t")
                                 ? journal[i]["planner_t"].get<Tick>()
                                 : journal[i].at("t").get<Tick>();
    s->apply_entry_locked(journal[i]);
    s->journal_.push_back(journal[i]);
  }
  return s;
}

std::vector<json> Session::read_journal(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read journal '" + file.string() + "'");
  std::vector<json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::IoError, "corrupt journal line: " + std::string(e.what()));
    }
  }
  return out;
}

Tick Session::planner_clock() {
  if (replaying_) return replay_planner_now_.value_or(0);
  if (!planner_now_) planner_now_ = scheduler_->now();
  return *planner_now_;
}

void Session::start_locked() {
  json entry = {{"event", "create"},
                {"session", id_},
                {"t", replaying_ ? replay_planner_now_.value_or(0) : scheduler_->now()},
                {"model", json::parse(serialize_model(options_.model))},
                {"robot_time_scale", options_.robot_time_scale},
                {"human_timeout_us", to_ticks(options_.human_timeout_s)},
                {"seed", options_.seed},
                {"protocol", kProtocolVersion}};
  planner_now_.reset();
  try {
    manager_->start();
  } catch (const Error& e) {
    throw Error(ErrorCode::ModelInvalid, std::string("no viable first action: ") + e.what());
  }
  if (manager_->phase() == Phase::Done) status_ = "solved";
  if (replaying_) return;
  if (planner_now_) entry["planner_t"] = *planner_now_;
  commit_locked(std::move(entry), std::nullopt);
}

void Session::check_open_locked() const {
  if (closed_) throw Error(ErrorCode::SessionClosed, "session " + id_ + " is closed");
}

void Session::apply(const Message& in) {
  std::lock_guard lock(mu_);
  check_open_locked();
  if (status_ != "in_progress") {
    throw Error(ErrorCode::SessionClosed, "session " + id_ + " has finished (" + status_ + ")");
  }
  if (in.session != id_) {
    throw Error(ErrorCode::ProtocolViolation, "frame addressed to session '" + in.session + "'");
  }
  if (in.kind != "action_done" && in.kind != "intervene" && in.kind != "handover_confirm") {
    throw Error(ErrorCode::ProtocolViolation, "clients may not send '" + in.kind + "' frames");
  }
  if (!in.payload.is_null() && !in.payload.is_object()) {
    throw Error(ErrorCode::ProtocolViolation, "'payload' must be an object");
  }
  const json payload = in.payload.is_null() ? json::object() : in.payload;
  const auto& pending = manager_->pending();
  if (!pending) throw Error(ErrorCode::InvalidTransition, "no suggestion is open");
  if (in.seq != pending->seq) {
    throw Error(ErrorCode::StaleSeq, "frame answers #" + std::to_string(in.seq) + " but #" +
                                         std::to_string(pending->seq) + " is open");
  }

  json entry = {{"event", in.kind}, {"t", scheduler_->now()}, {"seq", in.seq}};
  if (in.kind == "action_done") {
    if (pending->agent != AgentKind::Human) {
      throw Error(ErrorCode::InvalidTransition,
                  "#" + std::to_string(pending->seq) + " is not a human action; use " +
                      (pending->agent == AgentKind::Joint ? "handover_confirm" : "intervene"));
    }
    for (const auto& [key, _] : payload.items()) {
      if (key != "action" && key != "arc" && key != "outcome") {
        throw Error(ErrorCode::ProtocolViolation, "unknown action_done field '" + key + "'");
      }
    }
    if (payload.contains("action") && !payload["action"].is_string()) {
      throw Error(ErrorCode::ProtocolViolation, "'action' must be a string");
    }
    if (payload.contains("arc") && !payload["arc"].is_string()) {
      throw Error(ErrorCode::ProtocolViolation, "'arc' must be a string");
    }
    entry["action"] = payload.value("action", pending->action.name);
    entry["outcome"] = to_string(parse_outcome(payload));
    if (payload.contains("arc")) entry["arc"] = payload["arc"];
  } else if (in.kind == "handover_confirm") {
    if (pending->binding != Binding::Coordinated) {
      throw Error(ErrorCode::InvalidTransition, "#" + std::to_string(pending->seq) + " is not a joint action");
    }
  } else if (pending->agent != AgentKind::Robot) {
    throw Error(ErrorCode::InvalidTransition, "no robot action is in flight");
  }

  const auto previous = pending->seq;
  planner_now_.reset();
  apply_entry_locked(entry);
  if (planner_now_) entry["planner_t"] = *planner_now_;
  commit_locked(std::move(entry), previous);
}

void Session::handle_frame(std::string_view frame, SubscriberId from) {
  std::string kind;
  std::uint64_t seq = 0;
  try {
    Message m = Message::parse(frame);
    kind = m.kind;
    seq = m.seq;
    apply(m);
  } catch (const Error& e) {
    std::lock_guard lock(mu_);
    auto it = subscribers_.find(from);
    if (it == subscribers_.end()) return;
    json payload = {{"code", to_string(e.code())}, {"message", e.what()}, {"in_reply_to", kind},
                    {"answered_seq", seq}};
    it->second(frame_locked("error", std::move(payload)));
  }
}

// The single mutation path, shared by live events and replay. Anything that
// can reject an event runs before state is touched.
void Session::apply_entry_locked(const json& entry) {
  const std::string event = entry.at("event").get<std::string>();
  const Tick t = entry.at("t").get<Tick>();
  if (event == "timeout") {
    status_ = "failed";
    failure_reason_ = std::string(kReasonTimeout);
    return;
  }
  const auto& pending = manager_->pending();
  if (!pending) throw Error(ErrorCode::InvalidTransition, "no suggestion is open");
  const Suggestion open = *pending;
  const Tick elapsed = t - open.issued_at;
  try {
    if (event == "intervene") {
      manager_->on_intervention(StopEvent{t});
    } else {
      Ack ack;
      ack.seq = entry.at("seq").get<std::uint64_t>();
      ack.received_at = t;
      if (event == "action_done") {
        ack.action = entry.at("action").get<std::string>();
        ack.outcome = entry.at("outcome") == "failure" ? Outcome::Failure : Outcome::Success;
        ack.performed_by = AgentKind::Human;
        if (entry.contains("arc")) {
          auto arc = manager_->graph().find_arc(entry["arc"].get<std::string>());
          if (!arc) throw Error(ErrorCode::InvalidTransition, "unknown arc '" + entry["arc"].get<std::string>() + "'");
          ack.arc = *arc;
        }
      } else if (event == "handover_confirm") {
        ack.action = open.action.name;
        ack.performed_by = AgentKind::Human;
      } else if (event == "robot_done") {
        ack.action = open.action.name;
        ack.outcome = entry.at("outcome") == "failure" ? Outcome::Failure : Outcome::Success;
        ack.performed_by = AgentKind::Robot;
      } else {
        throw Error(ErrorCode::ProtocolViolation, "unknown journal event '" + event + "'");
      }
      manager_->on_ack(ack);
    }
  } catch (const Error& e) {
    rethrow_as_transition(e);
  }
  // Joint actions count as human time, like in the simulator.
  (open.agent == AgentKind::Robot ? t_r_ : t_h_) += elapsed;
  if (manager_->phase() == Phase::Done) {
    status_ = "solved";
  } else if (manager_->phase() == Phase::Failed) {
    status_ = "failed";
    failure_reason_ = manager_->failure_reason();
  }
}

// Journal first, then timers, then fan-out.
void Session::commit_locked(json entry, std::optional<std::uint64_t> previous_pending) {
  const std::string line = entry.dump();
  journal_.push_back(std::move(entry));
  if (journal_file_.is_open()) {
    journal_file_ << line << '\n';
    journal_file_.flush();
    if (!journal_file_) std::fprintf(stderr, "coplan: journal write failed for session %s\n", id_.c_str());
  }
  const auto& pending = manager_->pending();
  const bool fresh = pending && (!previous_pending || pending->seq != *previous_pending);
  if (status_ != "in_progress") {
    cancel_timers_locked();
  } else if (fresh) {
    arm_timers_locked();
  }
  broadcast_locked(frame_locked("state", snapshot_locked()));
  if (fresh && status_ == "in_progress") broadcast_locked(frame_locked("suggestion", suggestion_json(*pending)));
  if (status_ != "in_progress") broadcast_locked(frame_locked("metrics", metrics_locked()));
}

void Session::cancel_timers_locked() {
  if (robot_timer_) scheduler_->cancel(*robot_timer_);
  if (human_timer_) scheduler_->cancel(*human_timer_);
  robot_timer_.reset();
  human_timer_.reset();
}

void Session::arm_timers_locked() {
  cancel_timers_locked();
  const Suggestion& s = *manager_->pending();
  std::weak_ptr<Session> weak = weak_from_this();
  const std::uint64_t seq = s.seq;
  if (s.agent == AgentKind::Robot) {
    const RobotOutcome r = robot_execute(options_.robot, s.action, robot_rng_);
    const Tick delay = to_ticks(r.duration * options_.robot_time_scale);
    robot_timer_ = scheduler_->call_after(delay, [weak, seq, outcome = r.outcome] {
      if (auto self = weak.lock()) self->on_robot_done(seq, outcome);
    });
  } else {
    human_timer_ = scheduler_->call_after(to_ticks(options_.human_timeout_s), [weak, seq] {
      if (auto self = weak.lock()) self->on_timeout(seq);
    });
  }
}

void Session::on_robot_done(std::uint64_t seq, Outcome outcome) {
  std::lock_guard lock(mu_);
  robot_timer_.reset();
  const auto& pending = manager_->pending();
  if (closed_ || status_ != "in_progress" || !pending || pending->seq != seq) return;
  json entry = {{"event", "robot_done"}, {"t", scheduler_->now()}, {"seq", seq}, {"outcome", to_string(outcome)}};
  planner_now_.reset();
  try {
    apply_entry_locked(entry);
  } catch (const Error& e) {
    // Cannot happen for a commanded action; keep the session consistent.
    std::fprintf(stderr, "coplan: session %s rejected robot completion: %s\n", id_.c_str(), e.what());
    return;
  }
  if (planner_now_) entry["planner_t"] = *planner_now_;
  commit_locked(std::move(entry), seq);
}

void Session::on_timeout(std::uint64_t seq) {
  std::lock_guard lock(mu_);
  human_timer_.reset();
  const auto& pending = manager_->pending();
  if (closed_ || status_ != "in_progress" || !pending || pending->seq != seq) return;
  json entry = {{"event", "timeout"}, {"t", scheduler_->now()}, {"seq", seq}};
  apply_entry_locked(entry);
  commit_locked(std::move(entry), seq);
}

Session::SubscriberId Session::subscribe(Sink sink) {
  std::lock_guard lock(mu_);
  check_open_locked();
  const SubscriberId id = next_subscriber_++;
  sink(frame_locked("state", snapshot_locked()));
  if (status_ == "in_progress" && manager_->pending()) {
    sink(frame_locked("suggestion", suggestion_json(*manager_->pending())));
  }
  subscribers_.emplace(id, std::move(sink));
  return id;
}

void Session::unsubscribe(SubscriberId id) {
  std::lock_guard lock(mu_);
  subscribers_.erase(id);
}

std::string Session::frame_locked(std::string kind, json payload) {
  Message m{std::move(kind), id_, ++out_seq_, std::move(payload)};
  return m.dump();
}

void Session::broadcast_locked(const std::string& frame) {
  for (const auto& [_, sink] : subscribers_) sink(frame);
}

json Session::suggestion_json(const Suggestion& s) const {
  return {{"seq", s.seq},
          {"arc", manager_->graph().arc(s.arc).name},
          {"action", s.action.name},
          {"agent", to_string(s.agent)},
          {"binding", to_string(s.binding)},
          {"issued_at_us", s.issued_at}};
}

json Session::metrics_locked() const {
  const auto& timing = manager_->timing_report();
  return {{"t_m_us", timing.total},
          {"t_h_us", t_h_},
          {"t_r_us", t_r_},
          {"t_c_us", timing.total + t_h_ + t_r_},
          {"gaps", timing.gaps.size()},
          {"status", status_},
          {"failure_reason", failure_reason_}};
}

json Session::snapshot_locked() const {
  const AndOrGraph& g = manager_->graph();
  std::vector<std::string> solved, feasible_nodes, done, suppressed;
  for (const auto& n : g.nodes()) {
    if (n.solved) solved.push_back(n.name);
  }
  for (const auto& a : g.arcs()) {
    if (a.done) done.push_back(a.name);
    if (a.suppressed) suppressed.push_back(a.name);
  }
  const FeasibleSets fs = g.feasible_sets();
  for (NodeId n : fs.nodes) feasible_nodes.push_back(g.node(n).name);
  const auto& pending = manager_->pending();
  const bool open = status_ == "in_progress" && pending;
  return {{"protocol", kProtocolVersion},
          {"session", id_},
          {"model", g.name()},
          {"status", status_},
          {"phase", to_string(manager_->phase())},
          {"failure_reason", failure_reason_},
          {"nodes", {{"solved", sorted(solved)}, {"feasible", sorted(feasible_nodes)}}},
          {"arcs",
           {{"feasible", sorted(names_of(g, fs.arcs))},
            {"done", sorted(done)},
            {"suppressed", sorted(suppressed)}}},
          {"completed", names_of(g, manager_->completed_arcs())},
          {"path", {{"arcs", names_of(g, manager_->current_path().arcs)}, {"cost", manager_->current_path().cost}}},
          {"pending", open ? suggestion_json(*pending) : json()},
          {"metrics", metrics_locked()},
          {"events", journal_.size()}};
}

json Session::snapshot() const {
  std::lock_guard lock(mu_);
  check_open_locked();
  return snapshot_locked();
}

std::vector<json> Session::journal() const {
  std::lock_guard lock(mu_);
  return journal_;
}

AndOrGraph Session::graph() const {
  std::lock_guard lock(mu_);
  return manager_->graph();
}

bool Session::finished() const {
  std::lock_guard lock(mu_);
  return status_ != "in_progress";
}

void Session::close() {
  std::lock_guard lock(mu_);
  closed_ = true;
  cancel_timers_locked();
  subscribers_.clear();
}

// ---------------------------------------------------------------------------
// Registry

GraphSpec resolve_model(const json& ref, const std::filesystem::path& model_dir) {
  if (!ref.is_object() || ref.size() != 1) {
    throw Error(ErrorCode::ModelInvalid, "model must be exactly one of {\"path\"}, {\"palletize\"}, {\"inline\"}");
  }
  try {
    if (ref.contains("path")) {
      if (!ref["path"].is_string()) throw Error(ErrorCode::ModelInvalid, "model.path must be a string");
      const std::filesystem::path rel = ref["path"].get<std::string>();
      // Requests may only name files below the model directory.
      if (rel.is_absolute() || std::any_of(rel.begin(), rel.end(), [](const auto& p) { return p == ".."; })) {
        throw Error(ErrorCode::ModelNotFound, "model path '" + rel.string() + "' is outside the model directory");
      }
      const auto full = model_dir / rel;
      if (!std::filesystem::is_regular_file(full)) {
        throw Error(ErrorCode::ModelNotFound, "no model at '" + rel.string() + "'");
      }
      return load_model_file(full.string());
    }
    if (ref.contains("inline")) return parse_model(ref["inline"].dump());
    if (ref.contains("palletize")) {
      const json& p = ref["palletize"];
      if (!p.is_object() || !p.contains("parts") || !p["parts"].is_number_integer()) {
        throw Error(ErrorCode::ModelInvalid, "model.palletize needs an integer 'parts'");
      }
      return generate_palletization(p["parts"].get<int>(), p.value("w_h", 1.0), p.value("w_hw", 4.0));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ModelNotFound || e.code() == ErrorCode::ModelInvalid) throw;
    throw Error(ErrorCode::ModelInvalid, e.what());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ModelInvalid, e.what());
  }
  throw Error(ErrorCode::ModelInvalid, "model must be one of path, palletize, inline");
}

SessionRegistry::SessionRegistry(ServiceOptions options, std::shared_ptr<Scheduler> scheduler)
    : options_(std::move(options)), scheduler_(std::move(scheduler)), id_state_(std::random_device{}()) {
  id_state_ = (id_state_ << 32) ^ std::random_device{}();
}

std::string SessionRegistry::fresh_id_locked() {
  for (;;) {
    id_state_ = splitmix64(id_state_);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(id_state_));
    if (!sessions_.count(buf)) return buf;
  }
}

std::shared_ptr<Session> SessionRegistry::create(const json& request) {
  if (!request.is_object()) throw Error(ErrorCode::ConfigError, "create request must be an object");
  for (const auto& [key, _] : request.items()) {
    if (key != "model" && key != "robot" && key != "robot_time_scale" && key != "human_timeout" && key != "seed") {
      throw Error(ErrorCode::ConfigError, "unknown create field '" + key + "'");
    }
  }
  if (!request.contains("model")) throw Error(ErrorCode::ModelInvalid, "create request needs 'model'");
  SessionOptions o;
  o.model = resolve_model(request["model"], options_.model_dir);
  json agents = json::object();
  if (request.contains("robot")) agents["robot"] = request["robot"];
  o.robot = parse_agent_profile(agents, default_agent_profile()).robot;
  try {
    o.robot_time_scale = request.value("robot_time_scale", options_.robot_time_scale);
    o.human_timeout_s = request.value("human_timeout", options_.human_timeout_s);
    o.seed = request.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  o.journal_dir = options_.journal_dir;
  std::lock_guard lock(mu_);
  auto id = fresh_id_locked();
  auto s = Session::create(id, std::move(o), scheduler_);
  sessions_.emplace(std::move(id), s);
  return s;
}

std::shared_ptr<Session> SessionRegistry::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "no session '" + id + "'");
  return it->second;
}

std::size_t SessionRegistry::size() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

}  // namespace coplan
