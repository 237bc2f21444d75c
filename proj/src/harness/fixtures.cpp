// SPDX-License-Identifier: Apache-2.0
#include "quadplan/harness/fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "quadplan/agents/cascade.hpp"
#include "quadplan/benchmarks.hpp"
#include "quadplan/harness/experiment.hpp"

namespace quadplan::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Serves fixtures by role and variant and remembers the prompt hash each
/// one answered.
class RecordingBackend : public agents::LLMBackend {
 public:
  explicit RecordingBackend(std::vector<agents::Fixture> fixtures)
      : fixtures_(std::move(fixtures)), hashes_(fixtures_.size()) {}

  agents::LLMResponse complete(const agents::LLMRequest& request) override {
    for (std::size_t i = 0; i < fixtures_.size(); ++i) {
      const auto& f = fixtures_[i];
      if (f.role != request.role) continue;
      if (std::find(f.variants.begin(), f.variants.end(), request.variant) == f.variants.end()) continue;
      const std::string h = agents::MockBackend::prompt_hash(request);
      if (!hashes_[i].empty() && hashes_[i] != h) {
        throw HarnessError(HarnessError::Kind::Io, f.origin + ": " + f.role + " fixture answers two different prompts");
      }
      hashes_[i] = h;
      agents::LLMResponse r;
      r.text = f.responses[static_cast<std::size_t>(request.sample) % f.responses.size()];
      return r;
    }
    throw HarnessError(HarnessError::Kind::FixtureMissing,
                       "no " + request.role + " fixture for variant " + request.variant + " of " + request.task);
  }
  [[nodiscard]] std::string model_id() const override { return "mock"; }
  [[nodiscard]] const std::vector<std::string>& hashes() const { return hashes_; }

 private:
  std::vector<agents::Fixture> fixtures_;
  std::vector<std::string> hashes_;
};

}  // namespace

std::vector<std::string> rehash_fixtures(const fs::path& root) {
  std::vector<std::string> log;
  for (TaskKind task : all_tasks()) {
    const fs::path dir = root / std::string(task_name(task));
    const fs::path index = dir / "index.json";
    if (!fs::exists(index)) continue;
    auto backend = std::make_shared<RecordingBackend>(agents::MockBackend::load_fixtures(dir));
    agents::Gateway gw(backend);
    TaskConfig cfg;
    cfg.task = task;
    cfg.seed = 0;
    const agents::EnvDescription env = describe(task, build_scene(cfg));
    for (agents::Variant v : {agents::Variant::SPC, agents::Variant::SC, agents::Variant::C}) {
      agents::AgentOptions opt;
      opt.task = std::string(task_name(task));
      opt.variant = v;
      opt.repair_retries = 0;
      (void)agents::run_cascade(gw, env, SkillCatalog::standard(), opt);
    }
    json doc;
    {
      std::ifstream in(index);
      doc = json::parse(in);
    }
    auto& entries = doc.at("fixtures");
    for (std::size_t i = 0; i < entries.size() && i < backend->hashes().size(); ++i) {
      const std::string& h = backend->hashes()[i];
      if (h.empty()) continue;
      if (entries[i].value("prompt_sha256", "") != h) {
        log.push_back(std::string(task_name(task)) + " " + entries[i].at("role").get<std::string>() + " " +
                      entries[i].at("responses").at(0).get<std::string>() + " -> " + h.substr(0, 12));
      }
      entries[i]["prompt_sha256"] = h;
    }
    std::ofstream out(index);
    out << doc.dump(2) << "\n";
  }
  return log;
}

}  // namespace quadplan::harness
