// SPDX-License-Identifier: Apache-2.0
#include "quadplan/agents/gateway.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "quadplan/hash.hpp"

namespace quadplan::agents {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void unavailable(const std::string& why) { throw AgentError(AgentError::Kind::LLMUnavailable, why); }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) unavailable("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

int rough_tokens(const std::string& text) { return static_cast<int>((text.size() + 3) / 4); }

}  // namespace

// --- mock -------------------------------------------------------------------

MockBackend::MockBackend(std::vector<Fixture> fixtures, Mode mode) : fixtures_(std::move(fixtures)), mode_(mode) {}

std::vector<Fixture> MockBackend::load_fixtures(const fs::path& root) {
  if (!fs::is_directory(root)) unavailable("fixture directory " + root.string() + " does not exist");
  std::vector<fs::path> indexes;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().filename() == "index.json") indexes.push_back(entry.path());
  }
  std::sort(indexes.begin(), indexes.end());
  std::vector<Fixture> out;
  for (const auto& index : indexes) {
    json doc;
    try {
      doc = json::parse(read_file(index));
    } catch (const json::exception& e) {
      unavailable(index.string() + ": " + e.what());
    }
    const std::string task = doc.value("task", "");
    for (const auto& f : doc.at("fixtures")) {
      Fixture fx;
      fx.task = task;
      fx.role = f.at("role").get<std::string>();
      fx.variants = f.value("variants", std::vector<std::string>{});
      fx.cause = f.value("cause", "");
      fx.prompt_sha256 = f.value("prompt_sha256", "");
      for (const auto& r : f.at("responses")) fx.responses.push_back(read_file(index.parent_path() / r.get<std::string>()));
      if (fx.responses.empty()) unavailable(index.string() + ": fixture without responses");
      fx.origin = index.string();
      out.push_back(std::move(fx));
    }
  }
  return out;
}

std::string MockBackend::prompt_hash(const LLMRequest& request) {
  return sha256_hex(request.role + "\n" + prompt_text(request));
}

const Fixture* MockBackend::lookup(const LLMRequest& request) const {
  if (request.role == "replanner") {
    for (const auto& f : fixtures_) {
      if (f.role == request.role && f.task == request.task && (f.cause.empty() || f.cause == request.cause)) return &f;
    }
    return nullptr;
  }
  const std::string hash = prompt_hash(request);
  for (const auto& f : fixtures_) {
    if (f.role == request.role && f.prompt_sha256 == hash) return &f;
  }
  if (mode_ == Mode::Strict) return nullptr;
  const Fixture* fallback = nullptr;
  for (const auto& f : fixtures_) {
    if (f.role != request.role || f.task != request.task) continue;
    const bool same_variant =
        request.variant.empty() || std::find(f.variants.begin(), f.variants.end(), request.variant) != f.variants.end();
    if (same_variant) return &f;
    if (!fallback) fallback = &f;
  }
  return fallback;
}

LLMResponse MockBackend::complete(const LLMRequest& request) {
  const Fixture* f = lookup(request);
  if (!f) {
    unavailable("no fixture for role " + request.role + " (task " + request.task + ", prompt " +
                prompt_hash(request).substr(0, 12) + ")");
  }
  LLMResponse r;
  r.text = f->responses[static_cast<std::size_t>(request.sample) % f->responses.size()];
  r.usage.prompt_tokens = rough_tokens(prompt_text(request));
  r.usage.completion_tokens = rough_tokens(r.text);
  return r;
}

// --- http -------------------------------------------------------------------

HttpConfig HttpConfig::from_env() {
  auto get = [](const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
  };
  HttpConfig c;
  c.url = get("QUADPLAN_LLM_URL");
  c.model = get("QUADPLAN_LLM_MODEL");
  c.api_key = get("QUADPLAN_LLM_API_KEY");
  if (const std::string t = get("QUADPLAN_LLM_TIMEOUT"); !t.empty()) c.timeout_s = std::stod(t);
  if (c.url.empty()) unavailable("QUADPLAN_LLM_URL is not set");
  if (c.model.empty()) unavailable("QUADPLAN_LLM_MODEL is not set");
  return c;
}

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {}

LLMResponse HttpBackend::complete(const LLMRequest& request) {
  const auto scheme_end = config_.url.find("://");
  if (scheme_end == std::string::npos) unavailable("bad endpoint URL '" + config_.url + "'");
  const auto path_start = config_.url.find('/', scheme_end + 3);
  const std::string origin = config_.url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : config_.url.substr(path_start);

  json messages = json::array();
  messages.push_back({{"role", "system"}, {"content", request.system}});
  for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  const json body{{"model", request.model.empty() ? config_.model : request.model},
                  {"messages", messages},
                  {"temperature", request.temperature},
                  {"max_tokens", request.max_tokens}};

  httplib::Client client(origin);
  const auto secs = static_cast<time_t>(config_.timeout_s);
  const auto usecs = static_cast<time_t>((config_.timeout_s - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw TransientError("request failed: " + httplib::to_string(res.error()));
  if (res->status == 401 || res->status == 403) {
    throw AgentError(AgentError::Kind::AuthError, "endpoint rejected the credentials (HTTP " +
                                                      std::to_string(res->status) + ")");
  }
  if (res->status == 408 || res->status == 429 || res->status >= 500) {
    throw TransientError("HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) unavailable("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));

  LLMResponse out;
  try {
    const json doc = json::parse(res->body);
    out.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
    if (doc.contains("usage")) {
      out.usage.prompt_tokens = doc["usage"].value("prompt_tokens", 0);
      out.usage.completion_tokens = doc["usage"].value("completion_tokens", 0);
    }
  } catch (const json::exception& e) {
    unavailable(std::string("unexpected response body: ") + e.what());
  }
  out.latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

// --- gateway ----------------------------------------------------------------

Gateway::Gateway(std::shared_ptr<LLMBackend> backend, GatewayOptions options)
    : backend_(std::move(backend)), options_(std::move(options)) {
  if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

int Gateway::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

LLMResponse Gateway::complete(LLMRequest request) {
  if (request.model.empty()) request.model = backend_->model_id();
  {
    std::lock_guard lock(mu_);
    ++calls_;
  }
  for (int attempt = 0;; ++attempt) {
    try {
      LLMResponse r = backend_->complete(request);
      r.transcript_id = request.role + "-" +
                        sha256_hex(prompt_text(request) + "\n" + std::to_string(request.sample) + "\n" + r.text)
                            .substr(0, 12);
      log(request, &r, "", attempt);
      return r;
    } catch (const TransientError& e) {
      log(request, nullptr, e.what(), attempt);
      if (attempt >= options_.retries) {
        unavailable("gave up after " + std::to_string(attempt + 1) + " attempts: " + e.what());
      }
      options_.sleep(options_.backoff * (1 << attempt));
    } catch (const AgentError& e) {
      log(request, nullptr, e.what(), attempt);
      throw;
    }
  }
}

void Gateway::log(const LLMRequest& request, const LLMResponse* response, const std::string& error, int attempt) {
  if (options_.transcript.empty()) return;
  json messages = json::array();
  for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  json line{{"role", request.role},
            {"task", request.task},
            {"variant", request.variant},
            {"model", request.model},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens},
            {"sample", request.sample},
            {"attempt", attempt},
            {"prompt_sha256", MockBackend::prompt_hash(request)},
            {"system", request.system},
            {"messages", messages}};
  if (!request.cause.empty()) line["cause"] = request.cause;
  if (response) {
    line["id"] = response->transcript_id;
    line["response"] = response->text;
    line["usage"] = {{"prompt_tokens", response->usage.prompt_tokens},
                     {"completion_tokens", response->usage.completion_tokens}};
    line["latency_s"] = response->latency_s;
  } else {
    line["error"] = error;
  }
  std::lock_guard lock(mu_);
  if (options_.transcript.has_parent_path()) fs::create_directories(options_.transcript.parent_path());
  std::ofstream out(options_.transcript, std::ios::app);
  out << line.dump() << "\n";
}

}  // namespace quadplan::agents
