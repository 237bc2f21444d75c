// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <deque>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "quadplan/agents/cascade.hpp"
#include "quadplan/benchmarks.hpp"
#include "quadplan/dsl/parser.hpp"
#include "quadplan/dsl/printer.hpp"

using namespace quadplan;
using namespace quadplan::agents;

namespace {

std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(QUADPLAN_SOURCE_DIR) + "/" + rel);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kFixtures = std::string(QUADPLAN_SOURCE_DIR) + "/data/fixtures";

EnvDescription env_for(TaskKind task, std::uint64_t seed = 0) {
  TaskConfig cfg;
  cfg.task = task;
  cfg.seed = seed;
  return describe(task, build_scene(cfg));
}

/// Answers each role from its own queue; the last answer repeats.
class Scripted : public LLMBackend {
 public:
  std::map<std::string, std::deque<std::string>> answers;
  std::vector<LLMRequest> seen;

  LLMResponse complete(const LLMRequest& request) override {
    seen.push_back(request);
    auto& q = answers[request.role];
    if (q.empty()) throw AgentError(AgentError::Kind::LLMUnavailable, "no scripted answer for " + request.role);
    LLMResponse r;
    r.text = q.front();
    if (q.size() > 1) q.pop_front();
    return r;
  }
  [[nodiscard]] std::string model_id() const override { return "scripted"; }
};

AgentOptions options_for(TaskKind task, Variant v) {
  AgentOptions o;
  o.task = std::string(task_name(task));
  o.variant = v;
  return o;
}

GatewayOptions no_sleep() {
  GatewayOptions o;
  o.sleep = [](std::chrono::milliseconds) {};
  return o;
}

const char* kSketch =
    "STEP 1 CHECK: Is the box too heavy?\n"
    "  TRUE -> UNSOLVABLE\n"
    "  FALSE -> 2\n"
    "STEP 2 ACTION: Push the box. [push_to_position]\n"
    "  NEXT -> END\n";

}  // namespace

// --- text formats ------------------------------------------------------------

TEST(Sketch, RoundTrips) {
  const PlanSketch s = parse_sketch(slurp("data/fixtures/light/planner.txt"));
  EXPECT_EQ(s.steps.size(), 6u);
  EXPECT_EQ(s.check_count(), 2u);
  EXPECT_EQ(render_sketch(parse_sketch(render_sketch(s))), render_sketch(s));
}

TEST(Sketch, CycleIsMalformed) {
  const std::string text =
      "STEP 1 ACTION: Walk. [walk_to_position]\n  NEXT -> 2\n"
      "STEP 2 ACTION: Walk back. [walk_to_position]\n  NEXT -> 1\n";
  try {
    (void)parse_sketch(text);
    FAIL() << "expected MalformedOutput";
  } catch (const AgentError& e) {
    EXPECT_EQ(e.kind(), AgentError::Kind::MalformedOutput);
  }
}

TEST(Sketch, CheckNeedsBothEdgesAndEdgesMustResolve) {
  EXPECT_THROW((void)parse_sketch("STEP 1 CHECK: Heavy?\n  TRUE -> UNSOLVABLE\n"), AgentError);
  EXPECT_THROW((void)parse_sketch("STEP 1 ACTION: Walk. [walk_to_position]\n  NEXT -> 7\n"), AgentError);
  EXPECT_THROW((void)parse_sketch(""), AgentError);
}

TEST(Params, RoundTrips) {
  const ParamSheet p = parse_params(slurp("data/fixtures/light/calculator.txt"));
  EXPECT_FALSE(p.entries.empty());
  EXPECT_EQ(render_params(parse_params(render_params(p))), render_params(p));
}

TEST(Code, ExtractsFirstFence) {
  EXPECT_EQ(extract_code("text\n```plan\nsit_down()\n```\nmore\n```\nx\n```"), "sit_down()\n");
}

TEST(Numerals, Detection) {
  EXPECT_TRUE(contains_numeral("press it 3 times"));
  EXPECT_TRUE(contains_numeral("height 0.5"));
  EXPECT_FALSE(contains_numeral("stairs_step1_height and call_up"));
  EXPECT_FALSE(contains_numeral("no digits here"));
}

// --- prompts -------------------------------------------------------------------

TEST(Prompts, PlannerViewHasNoNumeralsOnAnyTask) {
  for (TaskKind t : all_tasks()) {
    for (std::uint64_t seed : {0, 1, 2, 3}) {
      const EnvDescription env = env_for(t, seed);
      EXPECT_FALSE(contains_numeral(env.render_for_planner())) << task_name(t);
      EXPECT_NO_THROW((void)planner_request(env, SkillCatalog::standard()));
    }
  }
}

TEST(Prompts, NumeralInPlannerViewIsRejected) {
  EnvDescription env = env_for(TaskKind::LightSwitching);
  env.prose += " The button is 2 meters up.";
  try {
    (void)planner_request(env, SkillCatalog::standard());
    FAIL() << "expected NumeralsInPrompt";
  } catch (const AgentError& e) {
    EXPECT_EQ(e.kind(), AgentError::Kind::NumeralsInPrompt);
  }
}

TEST(Prompts, CalculatorInstructionsMoveIntoCoderWithoutCalculator) {
  const EnvDescription env = env_for(TaskKind::LightSwitching);
  const auto& cat = SkillCatalog::standard();
  const PlanSketch sketch = parse_sketch(kSketch);
  const std::string marker = "You are the parameter calculator";
  const auto spc = coder_request(Variant::SPC, env, cat, &sketch, nullptr);
  const auto sc = coder_request(Variant::SC, env, cat, &sketch, nullptr);
  const auto c = coder_request(Variant::C, env, cat, nullptr, nullptr);
  EXPECT_EQ(spc.system.find(marker), std::string::npos);
  EXPECT_NE(sc.system.find(marker), std::string::npos);
  EXPECT_NE(c.system.find(marker), std::string::npos);
  EXPECT_NE(sc.messages.at(0).content.find("Plan:"), std::string::npos);
  EXPECT_EQ(c.messages.at(0).content.find("Plan:"), std::string::npos);
  for (const auto* r : {&spc, &sc, &c}) EXPECT_DOUBLE_EQ(r->temperature, 0.2);
}

// --- cascade -------------------------------------------------------------------

TEST(Cascade, UnknownSymbolInFormula) {
  auto backend = std::make_shared<Scripted>();
  backend->answers["calculator"] = {
      "STEP 2 push_to_position\n  reasoning: into the gap\n  obj = box\n  x = stair_gap\n  y = box_y\n  yaw = 0\n"};
  Gateway gw(backend, no_sleep());
  try {
    (void)compute_params(gw, env_for(TaskKind::LightSwitching), SkillCatalog::standard(), parse_sketch(kSketch),
                         options_for(TaskKind::LightSwitching, Variant::SPC));
    FAIL() << "expected UnknownSymbol";
  } catch (const AgentError& e) {
    EXPECT_EQ(e.kind(), AgentError::Kind::UnknownSymbol);
    EXPECT_NE(std::string(e.what()).find("stair_gap"), std::string::npos);
  }
  EXPECT_EQ(backend->seen.size(), 1u);  // not repaired
}

TEST(Cascade, ConditionCountMustMatchChecks) {
  auto backend = std::make_shared<Scripted>();
  backend->answers["coder"] = {"```plan\npush_to_position(box, 1, 0, 0)\n```"};
  Gateway gw(backend, no_sleep());
  const PlanSketch sketch = parse_sketch(kSketch);
  try {
    (void)generate_code(gw, env_for(TaskKind::LightSwitching), SkillCatalog::standard(), &sketch, nullptr,
                        options_for(TaskKind::LightSwitching, Variant::SC));
    FAIL() << "expected MalformedOutput";
  } catch (const AgentError& e) {
    EXPECT_EQ(e.kind(), AgentError::Kind::MalformedOutput);
  }
  EXPECT_EQ(backend->seen.size(), 3u);  // first answer plus two repairs
  EXPECT_EQ(backend->seen.back().messages.size(), 5u);
}

TEST(Cascade, RepairRoundRecovers) {
  auto backend = std::make_shared<Scripted>();
  backend->answers["coder"] = {"```plan\npush_to_position(box, 1, 0, 0)\n```",
                               "```plan\nif box_mass > push_mass_limit {\n  fail(\"heavy\")\n}\n"
                               "push_to_position(box, 1, 0, 0)\n```"};
  Gateway gw(backend, no_sleep());
  const PlanSketch sketch = parse_sketch(kSketch);
  const CodePlan plan = generate_code(gw, env_for(TaskKind::LightSwitching), SkillCatalog::standard(), &sketch,
                                      nullptr, options_for(TaskKind::LightSwitching, Variant::SC));
  EXPECT_EQ(count_conditions(dsl::parse_program(plan.source)), 1u);
  EXPECT_EQ(plan.provenance.transcript_ids.size(), 2u);
  EXPECT_EQ(plan.provenance.variant, "S+C");
}

TEST(Cascade, UnknownSkillIsParseRejected) {
  auto backend = std::make_shared<Scripted>();
  backend->answers["coder"] = {"```plan\njump_to_position(1, 0, 0)\n```"};
  Gateway gw(backend, no_sleep());
  try {
    (void)generate_code(gw, env_for(TaskKind::LightSwitching), SkillCatalog::standard(), nullptr, nullptr,
                        options_for(TaskKind::LightSwitching, Variant::C));
    FAIL() << "expected ParseRejected";
  } catch (const AgentError& e) {
    EXPECT_EQ(e.kind(), AgentError::Kind::ParseRejected);
  }
}

TEST(Cascade, SyntaxErrorIsParseRejected) {
  auto backend = std::make_shared<Scripted>();
  backend->answers["coder"] = {"```plan\nif box_mass > {\n```"};
  Gateway gw(backend, no_sleep());
  AgentOptions opt = options_for(TaskKind::LightSwitching, Variant::C);
  opt.repair_retries = 0;
  try {
    (void)generate_code(gw, env_for(TaskKind::LightSwitching), SkillCatalog::standard(), nullptr, nullptr, opt);
    FAIL() << "expected ParseRejected";
  } catch (const AgentError& e) {
    EXPECT_EQ(e.kind(), AgentError::Kind::ParseRejected);
  }
}

TEST(Cascade, EmptySketchIsMalformed) {
  auto backend = std::make_shared<Scripted>();
  Gateway gw(backend, no_sleep());
  const PlanSketch empty;
  EXPECT_THROW((void)generate_code(gw, env_for(TaskKind::LightSwitching), SkillCatalog::standard(), &empty, nullptr,
                                   options_for(TaskKind::LightSwitching, Variant::SC)),
               AgentError);
  EXPECT_THROW((void)compute_params(gw, env_for(TaskKind::LightSwitching), SkillCatalog::standard(), empty,
                                    options_for(TaskKind::LightSwitching, Variant::SPC)),
               AgentError);
  EXPECT_TRUE(backend->seen.empty());
}

// --- mock backend --------------------------------------------------------------

TEST(Mock, FixturesServeEveryTaskAndVariant) {
  auto backend = std::make_shared<MockBackend>(MockBackend::load_fixtures(kFixtures), MockBackend::Mode::Strict);
  Gateway gw(backend, no_sleep());
  for (TaskKind t : all_tasks()) {
    const EnvDescription env = env_for(t);
    for (Variant v : all_variants()) {
      const CodePlan plan = run_cascade(gw, env, SkillCatalog::standard(), options_for(t, v));
      EXPECT_NO_THROW((void)dsl::parse_program(plan.source)) << task_name(t) << " " << variant_name(v);
      EXPECT_EQ(plan.provenance.model, "mock");
      EXPECT_EQ(plan.provenance.variant, variant_name(v));
    }
    // The full cascade reproduces the golden plan.
    const CodePlan spc = run_cascade(gw, env, SkillCatalog::standard(), options_for(t, Variant::SPC));
    const std::string golden =
        dsl::print_program(dsl::parse_program(slurp("data/plans/golden/" + std::string(task_name(t)) + ".plan")));
    EXPECT_EQ(spc.source, golden) << task_name(t);
  }
}

TEST(Mock, SameRequestSameResponse) {
  auto backend = std::make_shared<MockBackend>(MockBackend::load_fixtures(kFixtures), MockBackend::Mode::Strict);
  Gateway gw(backend, no_sleep());
  const EnvDescription env = env_for(TaskKind::BridgeBuilding);
  const auto a = run_cascade(gw, env, SkillCatalog::standard(), options_for(TaskKind::BridgeBuilding, Variant::SPC));
  const auto b = run_cascade(gw, env, SkillCatalog::standard(), options_for(TaskKind::BridgeBuilding, Variant::SPC));
  EXPECT_EQ(a.source, b.source);
  EXPECT_EQ(a.provenance.transcript_ids, b.provenance.transcript_ids);
}

TEST(Mock, StrictMissIsUnavailable) {
  auto backend = std::make_shared<MockBackend>(MockBackend::load_fixtures(kFixtures), MockBackend::Mode::Strict);
  Gateway gw(backend, no_sleep());
  EnvDescription env = env_for(TaskKind::LightSwitching);
  env.prose += " The room is dark.";
  try {
    (void)run_cascade(gw, env, SkillCatalog::standard(), options_for(TaskKind::LightSwitching, Variant::SPC));
    FAIL() << "expected LLMUnavailable";
  } catch (const AgentError& e) {
    EXPECT_EQ(e.kind(), AgentError::Kind::LLMUnavailable);
  }
  // Nearest mode falls back to the task's fixture for the role.
  auto nearest = std::make_shared<MockBackend>(MockBackend::load_fixtures(kFixtures), MockBackend::Mode::Nearest);
  Gateway gw2(nearest, no_sleep());
  EXPECT_NO_THROW((void)run_cascade(gw2, env, SkillCatalog::standard(), options_for(TaskKind::LightSwitching, Variant::SPC)));
}

TEST(Mock, MissingFixtureDirectory) {
  EXPECT_THROW((void)MockBackend::load_fixtures("/nonexistent/fixtures"), AgentError);
}

TEST(Mock, ReplanFixtures) {
  auto backend = std::make_shared<MockBackend>(MockBackend::load_fixtures(kFixtures), MockBackend::Mode::Strict);
  Gateway gw(backend, no_sleep());
  TaskConfig cfg;
  cfg.task = TaskKind::LightSwitching;
  const Scene scene = build_scene(cfg);
  const EnvDescription env = describe(cfg.task, scene);
  const CodePlan primary =
      run_cascade(gw, env, SkillCatalog::standard(), options_for(TaskKind::LightSwitching, Variant::SPCR));

  ErrorReport report;
  report.failed_skill = {"hand_touch_position", {1.0, 0.0, 1.5}};
  report.reason = FailReason::OutOfReach;
  report.min_distance = 0.1;
  const CodePlan next = replan(gw, env, SkillCatalog::standard(), primary, report, scene,
                               options_for(TaskKind::LightSwitching, Variant::SPCR));
  EXPECT_EQ(next.provenance.cause, "failure");
  EXPECT_EQ(next.provenance.parent.size(), 16u);
  EXPECT_EQ(next.source, dsl::print_program(dsl::parse_program(slurp("data/plans/replan/light_touch_failure.plan"))));

  // No interruption fixture exists for light.
  EXPECT_THROW((void)replan(gw, env, SkillCatalog::standard(), primary,
                            std::vector<InterruptionNotice>{{0.0, "stop", NoticeSource::Operator}}, scene,
                            options_for(TaskKind::LightSwitching, Variant::SPCR)),
               AgentError);
  // Empty causes never reach the model.
  EXPECT_THROW((void)replan(gw, env, SkillCatalog::standard(), primary, ErrorReport{}, scene,
                            options_for(TaskKind::LightSwitching, Variant::SPCR)),
               AgentError);
  EXPECT_THROW((void)replan(gw, env, SkillCatalog::standard(), primary, std::vector<InterruptionNotice>{}, scene,
                            options_for(TaskKind::LightSwitching, Variant::SPCR)),
               AgentError);
}

// --- gateway -------------------------------------------------------------------

namespace {

class Flaky : public LLMBackend {
 public:
  int failures;
  int calls = 0;
  explicit Flaky(int f) : failures(f) {}
  LLMResponse complete(const LLMRequest&) override {
    if (calls++ < failures) throw TransientError("HTTP 503");
    LLMResponse r;
    r.text = "ok";
    return r;
  }
  [[nodiscard]] std::string model_id() const override { return "flaky"; }
};

LLMRequest simple_request() {
  LLMRequest r;
  r.role = "coder";
  r.system = "sys";
  r.messages.push_back({"user", "hello"});
  return r;
}

}  // namespace

TEST(Gateway, RetriesWithExponentialBackoff) {
  auto backend = std::make_shared<Flaky>(2);
  std::vector<long> slept;
  GatewayOptions opt;
  opt.sleep = [&](std::chrono::milliseconds d) { slept.push_back(static_cast<long>(d.count())); };
  Gateway gw(backend, opt);
  EXPECT_EQ(gw.complete(simple_request()).text, "ok");
  EXPECT_EQ(slept, (std::vector<long>{500, 1000}));
  EXPECT_EQ(backend->calls, 3);
}

TEST(Gateway, GivesUpAfterRetries) {
  auto backend = std::make_shared<Flaky>(100);
  std::vector<long> slept;
  GatewayOptions opt;
  opt.sleep = [&](std::chrono::milliseconds d) { slept.push_back(static_cast<long>(d.count())); };
  Gateway gw(backend, opt);
  try {
    (void)gw.complete(simple_request());
    FAIL() << "expected LLMUnavailable";
  } catch (const AgentError& e) {
    EXPECT_EQ(e.kind(), AgentError::Kind::LLMUnavailable);
  }
  EXPECT_EQ(backend->calls, 4);
  EXPECT_EQ(slept, (std::vector<long>{500, 1000, 2000}));
}

TEST(Gateway, TranscriptLogsEveryExchange) {
  const auto path = std::filesystem::temp_directory_path() / "quadplan_transcript_test.jsonl";
  std::filesystem::remove(path);
  auto backend = std::make_shared<Flaky>(1);
  GatewayOptions opt = no_sleep();
  opt.transcript = path;
  Gateway gw(backend, opt);
  const auto r = gw.complete(simple_request());
  std::ifstream in(path);
  std::vector<nlohmann::json> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_TRUE(lines[0].contains("error"));
  EXPECT_EQ(lines[1].at("id"), r.transcript_id);
  EXPECT_EQ(lines[1].at("prompt_sha256"), MockBackend::prompt_hash(simple_request()));
  EXPECT_EQ(lines[1].at("temperature"), 0.2);
  std::filesystem::remove(path);
}

namespace {

/// Local chat-completions endpoint answering with a fixed status.
class FakeEndpoint {
 public:
  explicit FakeEndpoint(int status) {
    server_.Post("/v1/chat/completions", [status](const httplib::Request& req, httplib::Response& res) {
      res.status = status;
      if (status == 200) {
        const auto body = nlohmann::json::parse(req.body);
        nlohmann::json out{{"choices", {{{"message", {{"role", "assistant"}, {"content", "echo " + body["model"].get<std::string>()}}}}}},
                           {"usage", {{"prompt_tokens", 7}, {"completion_tokens", 3}}}};
        res.set_content(out.dump(), "application/json");
      } else {
        res.set_content("{}", "application/json");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }
  [[nodiscard]] HttpConfig config() const {
    HttpConfig c;
    c.url = "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    c.model = "test-model";
    c.api_key = "k";
    c.timeout_s = 5.0;
    return c;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST(Http, SuccessParsesContentAndUsage) {
  FakeEndpoint ep(200);
  HttpBackend backend(ep.config());
  const LLMResponse r = backend.complete(simple_request());
  EXPECT_EQ(r.text, "echo test-model");
  EXPECT_EQ(r.usage.prompt_tokens, 7);
  EXPECT_EQ(r.usage.completion_tokens, 3);
}

TEST(Http, UnauthorizedIsAuthError) {
  FakeEndpoint ep(401);
  auto backend = std::make_shared<HttpBackend>(ep.config());
  Gateway gw(backend, no_sleep());
  try {
    (void)gw.complete(simple_request());
    FAIL() << "expected AuthError";
  } catch (const AgentError& e) {
    EXPECT_EQ(e.kind(), AgentError::Kind::AuthError);
  }
}

TEST(Http, ServerErrorIsRetriedThenUnavailable) {
  FakeEndpoint ep(503);
  auto backend = std::make_shared<HttpBackend>(ep.config());
  int sleeps = 0;
  GatewayOptions opt;
  opt.sleep = [&](std::chrono::milliseconds) { ++sleeps; };
  Gateway gw(backend, opt);
  try {
    (void)gw.complete(simple_request());
    FAIL() << "expected LLMUnavailable";
  } catch (const AgentError& e) {
    EXPECT_EQ(e.kind(), AgentError::Kind::LLMUnavailable);
  }
  EXPECT_EQ(sleeps, 3);
}
