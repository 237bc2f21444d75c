// SPDX-License-Identifier: Apache-2.0
#include "quadplan/harness/server.hpp"

#include <httplib.h>

#include "quadplan/dsl/parser.hpp"
#include "quadplan/harness/experiment.hpp"
#include "quadplan/skill_catalog.hpp"

namespace quadplan::harness {

using nlohmann::json;

std::string_view session_status_name(Session::Status status) {
  switch (status) {
    case Session::Status::Idle: return "idle";
    case Session::Status::Running: return "running";
    case Session::Status::Paused: return "paused";
    case Session::Status::Finished: return "finished";
  }
  return "?";
}

Session::Session(SessionOptions options) : options_(std::move(options)) {
  scene_ = build_scene(options_.scene);
  env_ = describe(options_.scene.task, scene_);
  snapshot_ = snapshot_to_json(take_snapshot(scene_));
  paused_ = options_.start_paused;
}

Session::~Session() {
  resume();
  if (worker_.joinable()) worker_.join();
}

void Session::start() {
  {
    std::lock_guard lock(mu_);
    if (started_) return;
  }
  std::shared_ptr<agents::LLMBackend> backend = options_.backend;
  if (!backend) {
    backend = std::make_shared<agents::MockBackend>(agents::MockBackend::load_fixtures(options_.fixtures),
                                                    agents::MockBackend::Mode::Strict);
  }
  auto gateway = std::make_shared<agents::Gateway>(backend);
  agents::AgentOptions opt;
  opt.task = std::string(task_name(options_.scene.task));
  opt.variant = options_.variant;
  const agents::CodePlan code = agents::run_cascade(*gateway, env_, SkillCatalog::standard(), opt);
  const dsl::Program program = dsl::parse_program(code.source);
  {
    std::lock_guard lock(mu_);
    started_ = true;
    plan_ = code.source;
  }
  worker_ = std::thread([this, gateway, code, program, opt] {
    ExecutionHooks hooks;
    hooks.interrupts = &queue_;
    hooks.on_entry = [this](const TraceEntry& e) {
      std::lock_guard lock(mu_);
      entries_.push_back(entry_to_json(e));
      cv_.notify_all();
    };
    hooks.on_boundary = [this](const Scene& s) { on_boundary(s); };
    ExecutionTrace tr = run_trajectory(program, scene_, options_.run, gateway.get(), env_, code, opt, hooks);
    std::lock_guard lock(mu_);
    snapshot_ = snapshot_to_json(take_snapshot(tr.final_scene));
    clock_ = tr.final_scene.clock;
    result_ = std::move(tr);
    finished_ = true;
    cv_.notify_all();
  });
}

void Session::on_boundary(const Scene& scene) {
  {
    std::lock_guard lock(mu_);
    snapshot_ = snapshot_to_json(take_snapshot(scene));
    clock_ = scene.clock;
    cv_.notify_all();
  }
  if (options_.pace.count() > 0) std::this_thread::sleep_for(options_.pace);
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return !paused_; });
}

void Session::wait() {
  std::unique_lock lock(mu_);
  if (!started_) return;
  cv_.wait(lock, [this] { return finished_; });
}

Session::Status Session::status() const {
  std::lock_guard lock(mu_);
  if (finished_) return Status::Finished;
  if (!started_) return Status::Idle;
  return paused_ ? Status::Paused : Status::Running;
}

json Session::state() const {
  const Status st = status();
  std::lock_guard lock(mu_);
  json j{{"session", options_.id},
         {"task", task_name(options_.scene.task)},
         {"status", session_status_name(st)},
         {"clock", clock_},
         {"entries", entries_.size()},
         {"snapshot", snapshot_}};
  if (result_) {
    j["outcome"] = outcome_name(result_->outcome);
    j["replans"] = result_->replans;
  }
  return j;
}

json Session::trace() const {
  std::lock_guard lock(mu_);
  json j{{"session", options_.id}, {"entries", entries_}, {"plan", plan_}};
  if (result_) {
    j["outcome"] = outcome_name(result_->outcome);
    j["detail"] = result_->outcome_detail;
    j["plans"] = result_->plans;
  }
  return j;
}

std::vector<json> Session::entries_since(std::size_t from, std::chrono::milliseconds timeout, bool& finished) const {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return entries_.size() > from || finished_; });
  std::vector<json> out;
  for (std::size_t i = from; i < entries_.size(); ++i) out.push_back(entries_[i]);
  finished = finished_ && from + out.size() >= entries_.size();
  return out;
}

double Session::interrupt(const std::string& instruction) {
  InterruptionNotice n;
  {
    std::lock_guard lock(mu_);
    n.clock = clock_;
  }
  n.instruction = instruction;
  n.source = NoticeSource::Operator;
  return queue_.enqueue(std::move(n));
}

void Session::pause() {
  std::lock_guard lock(mu_);
  if (!finished_) paused_ = true;
}

void Session::resume() {
  std::lock_guard lock(mu_);
  paused_ = false;
  cv_.notify_all();
}

std::optional<ExecutionTrace> Session::result() const {
  std::lock_guard lock(mu_);
  return result_;
}

// --- http -------------------------------------------------------------------

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
  send_json(res, status, {{"error", kind}, {"message", message}});
}

}  // namespace

Server::Server(Session& session) : session_(session), http_(std::make_unique<httplib::Server>()) {
  // No SO_REUSEPORT: a second server on the same port must fail to bind.
  http_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  // Wraps a handler with the session-id check.
  auto route = [this](auto handler) {
    return [this, handler](const httplib::Request& req, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
      if (req.has_param("session") && req.get_param_value("session") != session_.id()) {
        send_error(res, 404, "SessionNotFound", "no session '" + req.get_param_value("session") + "'");
        return;
      }
      handler(req, res);
    };
  };

  http_->Get("/state", route([this](const httplib::Request&, httplib::Response& res) {
               send_json(res, 200, session_.state());
             }));
  http_->Get("/trace", route([this](const httplib::Request&, httplib::Response& res) {
               send_json(res, 200, session_.trace());
             }));
  http_->Get("/events", route([this](const httplib::Request&, httplib::Response& res) {
               auto next = std::make_shared<std::size_t>(0);
               res.set_header("Cache-Control", "no-cache");
               res.set_chunked_content_provider("text/event-stream", [this, next](std::size_t, httplib::DataSink& sink) {
                 if (stopping_) return false;
                 bool finished = false;
                 for (const auto& e : session_.entries_since(*next, std::chrono::milliseconds(200), finished)) {
                   const std::string chunk = "id: " + std::to_string(*next) + "\nevent: entry\ndata: " + e.dump() + "\n\n";
                   if (!sink.write(chunk.data(), chunk.size())) return false;
                   ++*next;
                 }
                 if (finished) {
                   const json end = session_.state();
                   const std::string chunk = "event: end\ndata: " + end.dump() + "\n\n";
                   sink.write(chunk.data(), chunk.size());
                   sink.done();
                 }
                 return true;
               });
             }));
  http_->Post("/interrupt", route([this](const httplib::Request& req, httplib::Response& res) {
                std::string instruction;
                try {
                  const json body = json::parse(req.body);
                  instruction = body.value("instruction", "");
                } catch (const json::exception&) {
                  send_error(res, 400, "BadRequest", "body must be {\"instruction\": \"...\"}");
                  return;
                }
                if (instruction.empty()) {
                  send_error(res, 400, "BadRequest", "instruction must not be empty");
                  return;
                }
                try {
                  send_json(res, 202, {{"observed_at", session_.interrupt(instruction)}});
                } catch (const ExecutorError& e) {
                  if (e.kind() == ExecutorError::Kind::QueueClosed) {
                    send_error(res, 409, "QueueClosed", e.what());
                  } else {
                    send_error(res, 400, "BadRequest", e.what());
                  }
                }
              }));
  http_->Post("/pause", route([this](const httplib::Request&, httplib::Response& res) {
                session_.pause();
                send_json(res, 200, session_.state());
              }));
  http_->Post("/resume", route([this](const httplib::Request&, httplib::Response& res) {
                session_.resume();
                send_json(res, 200, session_.state());
              }));
}

Server::~Server() { stop(); }

int Server::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = http_->bind_to_any_port(host);
    if (bound <= 0) throw HarnessError(HarnessError::Kind::PortInUse, "cannot bind " + host);
  } else if (!http_->bind_to_port(host, port)) {
    throw HarnessError(HarnessError::Kind::PortInUse, "port " + std::to_string(port) + " on " + host + " is in use");
  }
  thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  return bound;
}

void Server::stop() {
  stopping_ = true;
  if (http_) http_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace quadplan::harness
