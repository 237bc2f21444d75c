// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadplan/agents/types.hpp"

namespace quadplan::agents {

/// Thrown by backends for failures worth retrying (timeouts, 429, 5xx).
class TransientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LLMBackend {
 public:
  virtual ~LLMBackend() = default;
  /// Throws TransientError, or AgentError (AuthError, LLMUnavailable).
  virtual LLMResponse complete(const LLMRequest& request) = 0;
  [[nodiscard]] virtual std::string model_id() const = 0;
};

// --- mock backend -----------------------------------------------------------

struct Fixture {
  std::string task;
  std::string role;
  std::vector<std::string> variants;
  std::string cause;
  std::string prompt_sha256;
  std::vector<std::string> responses;
  /// Where the fixture was loaded from (for messages).
  std::string origin;
};

/// Content-addressed fixture store. Cascade roles are keyed by (role, hash of
/// the assembled prompt). Replanner prompts embed run-time numbers, so those
/// fixtures are keyed by (task, cause) instead.
class MockBackend : public LLMBackend {
 public:
  enum class Mode { Strict, Nearest };

  explicit MockBackend(std::vector<Fixture> fixtures, Mode mode = Mode::Strict);

  /// Loads every `index.json` below `root`. Response entries name text files
  /// next to the index. Throws AgentError::LLMUnavailable when `root` is missing.
  static std::vector<Fixture> load_fixtures(const std::filesystem::path& root);

  LLMResponse complete(const LLMRequest& request) override;
  [[nodiscard]] std::string model_id() const override { return "mock"; }
  [[nodiscard]] const std::vector<Fixture>& fixtures() const { return fixtures_; }

  /// Hash the store keys prompts by.
  static std::string prompt_hash(const LLMRequest& request);

 private:
  const Fixture* lookup(const LLMRequest& request) const;

  std::vector<Fixture> fixtures_;
  Mode mode_;
};

// --- HTTP backend -----------------------------------------------------------

struct HttpConfig {
  /// Full URL of a chat-completions endpoint.
  std::string url;
  std::string model;
  std::string api_key;
  double timeout_s = 60.0;

  /// From QUADPLAN_LLM_URL, QUADPLAN_LLM_MODEL and QUADPLAN_LLM_API_KEY.
  /// Throws AgentError::LLMUnavailable when the URL or model is unset.
  static HttpConfig from_env();
};

/// Generic chat-completions client (request: model, messages, temperature,
/// max_tokens; response: choices[0].message.content and usage).
class HttpBackend : public LLMBackend {
 public:
  explicit HttpBackend(HttpConfig config);
  LLMResponse complete(const LLMRequest& request) override;
  [[nodiscard]] std::string model_id() const override { return config_.model; }

 private:
  HttpConfig config_;
};

// --- gateway ----------------------------------------------------------------

struct GatewayOptions {
  int retries = 3;
  std::chrono::milliseconds backoff{500};
  /// Transcript log (line-delimited JSON). Empty disables logging.
  std::filesystem::path transcript;
  /// Replaced in tests to avoid real sleeping.
  std::function<void(std::chrono::milliseconds)> sleep;
};

/// Single entry point for all agent calls: retries transient failures with
/// exponential backoff and appends every exchange to the transcript log.
class Gateway {
 public:
  Gateway(std::shared_ptr<LLMBackend> backend, GatewayOptions options = {});

  /// Throws AgentError::LLMUnavailable after the retries, or AuthError.
  LLMResponse complete(LLMRequest request);

  [[nodiscard]] std::string model_id() const { return backend_->model_id(); }
  [[nodiscard]] int calls() const;

 private:
  void log(const LLMRequest& request, const LLMResponse* response, const std::string& error, int attempt);

  std::shared_ptr<LLMBackend> backend_;
  GatewayOptions options_;
  mutable std::mutex mu_;
  int calls_ = 0;
};

}  // namespace quadplan::agents
