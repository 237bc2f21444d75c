// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "quadplan/agents/cascade.hpp"
#include "quadplan/benchmarks.hpp"
#include "quadplan/executor.hpp"

namespace httplib {
class Server;
}

namespace quadplan::harness {

struct SessionOptions {
  std::string id = "live";
  TaskConfig scene;  // task and seed of the session
  RunConfig run;
  agents::Variant variant = agents::Variant::SPCR;
  std::filesystem::path fixtures = "data/fixtures";
  /// Gateway backend; mock fixtures from `fixtures` when null.
  std::shared_ptr<agents::LLMBackend> backend;
  /// Wall-clock delay per skill boundary.
  std::chrono::milliseconds pace{0};
  bool start_paused = false;
};

/// One live trajectory: a plan from the cascade run on its own thread, with
/// operator interrupts, pause and resume.
class Session {
 public:
  enum class Status { Idle, Running, Paused, Finished };

  explicit Session(SessionOptions options);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  /// Generates the plan and starts execution. Throws agents::AgentError when
  /// no plan can be generated.
  void start();
  void wait();

  [[nodiscard]] const std::string& id() const { return options_.id; }
  [[nodiscard]] Status status() const;
  [[nodiscard]] nlohmann::json state() const;
  /// Entries so far; the outcome once finished.
  [[nodiscard]] nlohmann::json trace() const;

  /// Entries from index `from` on, waiting up to `timeout` for at least one.
  /// `finished` is set when the trajectory is over and nothing is left.
  std::vector<nlohmann::json> entries_since(std::size_t from, std::chrono::milliseconds timeout, bool& finished) const;

  /// Returns the clock at which the notice will be observed. Throws
  /// ExecutorError QueueClosed or BadConfig.
  double interrupt(const std::string& instruction);
  void pause();
  void resume();

  [[nodiscard]] std::optional<ExecutionTrace> result() const;

 private:
  void on_boundary(const Scene& scene);

  SessionOptions options_;
  Scene scene_;
  agents::EnvDescription env_;
  InterruptionQueue queue_;
  std::thread worker_;

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::vector<nlohmann::json> entries_;
  nlohmann::json snapshot_;
  double clock_ = 0.0;
  bool paused_ = false;
  bool started_ = false;
  bool finished_ = false;
  std::optional<ExecutionTrace> result_;
  std::string plan_;
};

std::string_view session_status_name(Session::Status status);

/// HTTP/SSE surface of one session:
///   GET /state, GET /trace, GET /events (SSE), POST /interrupt, POST /pause, POST /resume.
/// Every route takes an optional `session` query parameter.
class Server {
 public:
  explicit Server(Session& session);
  ~Server();

  /// Binds `host`:`port` (0 picks a free port) and serves on a background
  /// thread. Returns the bound port. Throws HarnessError::PortInUse.
  int start(const std::string& host, int port);
  void stop();

 private:
  Session& session_;
  std::unique_ptr<httplib::Server> http_;
  std::thread thread_;
  std::atomic<bool> stopping_{false};
};

}  // namespace quadplan::harness
