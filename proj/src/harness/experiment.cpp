// SPDX-License-Identifier: Apache-2.0
#include "quadplan/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "quadplan/dsl/parser.hpp"
#include "quadplan/hash.hpp"

namespace quadplan::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& why) { throw HarnessError(HarnessError::Kind::InvalidSpec, why); }

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fixed(double v, int digits) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(digits);
  out << v;
  return out.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw HarnessError(HarnessError::Kind::Io, "cannot write " + path.string());
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HarnessError(HarnessError::Kind::Io, "cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct Batch {
  TaskKind task;
  agents::Variant variant;
  std::uint64_t seed;
  int code_run;
};

}  // namespace

void ExperimentSpec::check() const {
  if (tasks.empty()) invalid("no tasks");
  if (variants.empty()) invalid("no variants");
  if (code_runs < 1) invalid("code_runs must be at least 1");
  if (trajectories_per_code < 1) invalid("trajectories_per_code must be at least 1");
  if (seeds.empty()) invalid("no seeds");
  if (!(temperature >= 0.0 && temperature <= 2.0)) invalid("temperature outside [0, 2]");
  if (!(time_limit > 0.0)) invalid("time_limit must be positive");
  if (replan_budget < 0) invalid("replan_budget must be >= 0");
  for (auto v : variants) {
    if (agents::uses_replanner(v) && replan_budget == 0) {
      invalid("variant " + std::string(agents::variant_name(v)) + " needs a nonzero replan budget");
    }
  }
  try {
    (void)NoiseRegime::preset(noise);
    scene.check();
  } catch (const std::exception& e) {
    invalid(e.what());
  }
  if (threads < 0) invalid("threads must be >= 0");
}

json spec_to_json(const ExperimentSpec& spec) {
  json tasks = json::array();
  for (auto t : spec.tasks) tasks.push_back(task_name(t));
  json variants = json::array();
  for (auto v : spec.variants) variants.push_back(agents::variant_name(v));
  json scene = task_config_to_json(spec.scene);
  scene.erase("task");
  scene.erase("seed");
  json j{{"tasks", tasks},
         {"variants", variants},
         {"code_runs", spec.code_runs},
         {"trajectories_per_code", spec.trajectories_per_code},
         {"seeds", spec.seeds},
         {"backend", spec.backend == BackendKind::Mock ? "mock" : "live"},
         {"noise", spec.noise},
         {"temperature", spec.temperature},
         {"time_limit", spec.time_limit},
         {"replan_budget", spec.replan_budget},
         {"fixtures", spec.fixtures.string()},
         {"scene", scene},
         {"threads", spec.threads},
         {"save_traces", spec.save_traces}};
  if (spec.touch_overshoot) j["touch_overshoot"] = *spec.touch_overshoot;
  return j;
}

ExperimentSpec spec_from_json(const json& doc) {
  static const std::set<std::string> known{"tasks",        "variants",      "code_runs", "trajectories_per_code",
                                           "seeds",        "backend",       "noise",     "temperature",
                                           "time_limit",   "replan_budget", "fixtures",  "scene",
                                           "threads",      "save_traces",   "touch_overshoot"};
  if (!doc.is_object()) invalid("spec must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) invalid("unknown spec key '" + key + "'");
  }
  ExperimentSpec s;
  try {
    if (doc.contains("tasks")) {
      s.tasks.clear();
      for (const auto& t : doc["tasks"]) s.tasks.push_back(task_from_name(t.get<std::string>()));
    }
    if (doc.contains("variants")) {
      s.variants.clear();
      for (const auto& v : doc["variants"]) s.variants.push_back(agents::variant_from_name(v.get<std::string>()));
    }
    s.code_runs = doc.value("code_runs", s.code_runs);
    s.trajectories_per_code = doc.value("trajectories_per_code", s.trajectories_per_code);
    if (doc.contains("seeds")) s.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
    const std::string backend = doc.value("backend", "mock");
    if (backend != "mock" && backend != "live") invalid("backend must be mock or live");
    s.backend = backend == "mock" ? BackendKind::Mock : BackendKind::Live;
    s.noise = doc.value("noise", s.noise);
    s.temperature = doc.value("temperature", s.temperature);
    s.time_limit = doc.value("time_limit", s.time_limit);
    s.replan_budget = doc.value("replan_budget", s.replan_budget);
    s.fixtures = doc.value("fixtures", s.fixtures.string());
    if (doc.contains("scene")) {
      json scene = doc["scene"];
      scene["task"] = "light";
      s.scene = task_config_from_json(scene);
    }
    s.threads = doc.value("threads", s.threads);
    s.save_traces = doc.value("save_traces", s.save_traces);
    if (doc.contains("touch_overshoot")) s.touch_overshoot = doc["touch_overshoot"].get<double>();
  } catch (const json::exception& e) {
    invalid(e.what());
  } catch (const std::invalid_argument& e) {
    invalid(e.what());
  } catch (const BenchmarkError& e) {
    invalid(e.what());
  }
  s.check();
  return s;
}

ExperimentSpec load_spec(const fs::path& path) {
  try {
    return spec_from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    invalid(path.string() + ": " + e.what());
  }
}

std::uint64_t trajectory_seed(std::uint64_t seed, TaskKind task, int code_run, int trajectory) {
  return mix_seed(mix_seed(seed, static_cast<std::uint64_t>(task)),
                  static_cast<std::uint64_t>(code_run) * 1000003ULL + static_cast<std::uint64_t>(trajectory));
}

std::shared_ptr<agents::LLMBackend> make_backend(const ExperimentSpec& spec) {
  if (spec.backend == BackendKind::Live) return std::make_shared<agents::HttpBackend>(agents::HttpConfig::from_env());
  try {
    return std::make_shared<agents::MockBackend>(agents::MockBackend::load_fixtures(spec.fixtures),
                                                 agents::MockBackend::Mode::Strict);
  } catch (const agents::AgentError& e) {
    throw HarnessError(HarnessError::Kind::FixtureMissing, e.what());
  }
}

ExecutionTrace run_trajectory(const dsl::Program& plan, const Scene& scene, const RunConfig& cfg,
                              agents::Gateway* gateway, const agents::EnvDescription& env,
                              const agents::CodePlan& primary, const agents::AgentOptions& opt,
                              const ExecutionHooks& hooks) {
  Replanner replanner;
  if (gateway && agents::uses_replanner(opt.variant)) {
    replanner = [&](const ReplanCause& cause, const Scene& now) -> std::optional<dsl::Program> {
      const agents::CodePlan next =
          agents::replan(*gateway, env, SkillCatalog::standard(), primary, cause, now, opt);
      return dsl::parse_program(next.source);
    };
  }
  return execute(plan, scene, cfg, replanner, hooks);
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const fs::path& out_dir) {
  spec.check();
  const NoiseRegime noise = NoiseRegime::preset(spec.noise);
  agents::GatewayOptions gopt;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    gopt.transcript = out_dir / "transcripts.jsonl";
    fs::remove(gopt.transcript);
    write_file(out_dir / "spec.json", spec_to_json(spec).dump(2) + "\n");
  }
  agents::Gateway gw(make_backend(spec), gopt);
  const SkillCatalog& catalog = SkillCatalog::standard();
  const unsigned threads =
      spec.threads > 0 ? static_cast<unsigned>(spec.threads) : std::max(1u, std::thread::hardware_concurrency());

  ExperimentResult result;
  for (TaskKind task : spec.tasks) {
    TaskConfig base = spec.scene;
    base.task = task;
    base.seed = 0;
    const agents::EnvDescription env = describe(task, build_scene(base));
    for (agents::Variant variant : spec.variants) {
      for (std::uint64_t seed : spec.seeds) {
        for (int run = 0; run < spec.code_runs; ++run) {
          agents::AgentOptions opt;
          opt.temperature = spec.temperature;
          opt.task = std::string(task_name(task));
          opt.variant = variant;
          opt.sample = run;
          agents::CodePlan code;
          try {
            code = agents::run_cascade(gw, env, catalog, opt);
          } catch (const agents::AgentError& e) {
            if (spec.backend == BackendKind::Mock) {
              throw HarnessError(HarnessError::Kind::FixtureMissing,
                                 std::string(task_name(task)) + " " + std::string(agents::variant_name(variant)) +
                                     ": " + e.what());
            }
            throw;
          }
          const dsl::Program program = dsl::parse_program(code.source);
          const std::string plan_hash = sha256_hex(code.source).substr(0, 16);
          const std::string key = std::string(task_name(task)) + "/" + std::string(agents::variant_name(variant)) +
                                  "/seed" + std::to_string(seed) + "/run" + std::to_string(run);
          result.plans.emplace_back(key, code);

          const int n = spec.trajectories_per_code;
          std::vector<SampleRow> rows(static_cast<std::size_t>(n));
          std::vector<std::string> traces(spec.save_traces ? static_cast<std::size_t>(n) : 0);
          std::atomic<int> next{0};
          auto worker = [&] {
            for (int k = next++; k < n; k = next++) {
              const std::uint64_t sseed = trajectory_seed(seed, task, run, k);
              TaskConfig cfg = base;
              cfg.seed = sseed;
              const Scene scene = build_scene(cfg);
              RunConfig rc;
              rc.time_limit = spec.time_limit;
              rc.replan_budget = agents::uses_replanner(variant) ? spec.replan_budget : 0;
              rc.noise = noise;
              rc.seed = mix_seed(sseed, 0xE7EC);
              rc.touch_overshoot = spec.touch_overshoot;
              const ExecutionTrace tr = run_trajectory(program, scene, rc, &gw, env, code, opt);
              const MetricSample m = measure(task, tr, spec.time_limit);
              SampleRow& row = rows[static_cast<std::size_t>(k)];
              row.task = std::string(task_name(task));
              row.variant = std::string(agents::variant_name(variant));
              row.seed = seed;
              row.code_run = run;
              row.trajectory = k;
              row.scene_seed = sseed;
              row.success = m.success;
              row.norm_dist = m.norm_dist;
              row.clock = m.clock;
              row.replans = m.replans;
              row.outcome = std::string(outcome_name(m.outcome));
              row.trace_hash = tr.hash();
              row.plan_hash = plan_hash;
              if (spec.save_traces) traces[static_cast<std::size_t>(k)] = tr.to_jsonl();
            }
          };
          if (threads <= 1) {
            worker();
          } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
          }
          result.samples.insert(result.samples.end(), rows.begin(), rows.end());
          if (!out_dir.empty()) {
            const fs::path dir = out_dir / "plans" / std::string(task_name(task)) /
                                 std::string(agents::variant_name(variant));
            const std::string stem = "seed" + std::to_string(seed) + "_run" + std::to_string(run);
            write_file(dir / (stem + ".plan"), code.source);
            write_file(dir / (stem + ".json"), agents::provenance_to_json(code.provenance).dump(2) + "\n");
            if (spec.save_traces) {
              std::string all;
              for (const auto& t : traces) all += t;
              write_file(out_dir / "traces" / std::string(task_name(task)) /
                             std::string(agents::variant_name(variant)) / (stem + ".jsonl"),
                         all);
            }
          }
        }
      }
    }
  }
  result.table = aggregate(result.samples);
  if (!out_dir.empty()) {
    write_file(out_dir / "samples.csv", samples_csv(result.samples));
    write_file(out_dir / "results.csv", results_csv(result.table));
    json plans = json::object();
    std::string listing;
    for (const auto& [key, code] : result.plans) {
      json prov = agents::provenance_to_json(code.provenance);
      prov["plan_hash"] = sha256_hex(code.source).substr(0, 16);
      listing += "| " + key + " | " + code.provenance.model + " | " + prov["plan_hash"].get<std::string>() + " | ";
      for (std::size_t i = 0; i < code.provenance.transcript_ids.size(); ++i) {
        listing += (i ? " " : "") + code.provenance.transcript_ids[i];
      }
      listing += " |\n";
      plans[key] = std::move(prov);
    }
    json rows = json::array();
    for (const auto& r : result.table) {
      rows.push_back({{"task", r.task},
                      {"variant", r.variant},
                      {"success_mean", r.success_mean},
                      {"success_std", r.success_std},
                      {"norm_dist_mean", r.norm_dist_mean},
                      {"norm_dist_std", r.norm_dist_std},
                      {"seeds", r.seeds},
                      {"trajectories", r.trajectories}});
    }
    write_file(out_dir / "results.json",
               json{{"spec", spec_to_json(spec)}, {"results", rows}, {"plans", plans}}.dump(2) + "\n");
    write_file(out_dir / "results.md", render_table(result.table) + "\n## Spec\n\n```json\n" +
                                           spec_to_json(spec).dump(2) +
                                           "\n```\n\n## Plans\n\n| Plan | Model | Hash | Transcripts |\n|---|---|---|---|\n" +
                                           listing);
  }
  return result;
}

std::vector<ResultRow> aggregate(const std::vector<SampleRow>& samples) {
  struct Acc {
    double success = 0.0;
    double nd = 0.0;
    std::size_t n = 0;
  };
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::map<std::uint64_t, Acc>> groups;
  for (const auto& s : samples) {
    const auto key = std::make_pair(s.task, s.variant);
    if (!groups.count(key)) order.push_back(key);
    Acc& a = groups[key][s.seed];
    a.success += s.success ? 1.0 : 0.0;
    a.nd += s.norm_dist;
    ++a.n;
  }
  auto mean_std = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
    return std::make_pair(mean, sd);
  };
  std::vector<ResultRow> rows;
  for (const auto& key : order) {
    std::vector<double> succ;
    std::vector<double> nd;
    ResultRow r;
    r.task = key.first;
    r.variant = key.second;
    for (const auto& [seed, a] : groups[key]) {
      succ.push_back(a.success / static_cast<double>(a.n));
      nd.push_back(a.nd / static_cast<double>(a.n));
      r.trajectories += a.n;
    }
    r.seeds = succ.size();
    std::tie(r.success_mean, r.success_std) = mean_std(succ);
    std::tie(r.norm_dist_mean, r.norm_dist_std) = mean_std(nd);
    rows.push_back(r);
  }
  return rows;
}

static constexpr std::string_view kSampleHeader =
    "task,variant,seed,code_run,trajectory,scene_seed,success,norm_dist,clock,replans,outcome,trace_hash,plan_hash";

std::string samples_csv(const std::vector<SampleRow>& samples) {
  std::ostringstream out;
  out << kSampleHeader << "\n";
  for (const auto& s : samples) {
    out << s.task << "," << s.variant << "," << s.seed << "," << s.code_run << "," << s.trajectory << ","
        << s.scene_seed << "," << (s.success ? 1 : 0) << "," << fmt(s.norm_dist) << "," << fmt(s.clock) << ","
        << s.replans << "," << s.outcome << "," << s.trace_hash << "," << s.plan_hash << "\n";
  }
  return out.str();
}

std::vector<SampleRow> parse_samples_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kSampleHeader) {
    throw HarnessError(HarnessError::Kind::Io, "samples.csv: unexpected header");
  }
  std::vector<SampleRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    for (std::size_t start = 0;;) {
      const std::size_t comma = line.find(',', start);
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 13) throw HarnessError(HarnessError::Kind::Io, "samples.csv line " + std::to_string(line_no));
    SampleRow r;
    try {
      r.task = f[0];
      r.variant = f[1];
      r.seed = std::stoull(f[2]);
      r.code_run = std::stoi(f[3]);
      r.trajectory = std::stoi(f[4]);
      r.scene_seed = std::stoull(f[5]);
      r.success = f[6] == "1";
      r.norm_dist = std::stod(f[7]);
      r.clock = std::stod(f[8]);
      r.replans = std::stoi(f[9]);
      r.outcome = f[10];
      r.trace_hash = f[11];
      r.plan_hash = f[12];
    } catch (const std::logic_error&) {
      throw HarnessError(HarnessError::Kind::Io, "samples.csv line " + std::to_string(line_no) + ": bad number");
    }
    rows.push_back(r);
  }
  return rows;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << "task,variant,success_mean,success_std,norm_dist_mean,norm_dist_std,seeds,trajectories\n";
  for (const auto& r : rows) {
    out << r.task << "," << r.variant << "," << fmt(r.success_mean) << "," << fmt(r.success_std) << ","
        << fmt(r.norm_dist_mean) << "," << fmt(r.norm_dist_std) << "," << r.seeds << "," << r.trajectories << "\n";
  }
  return out.str();
}

std::string render_table(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << "| Task | Variant | Success | NormDist | Seeds | Trajectories |\n";
  out << "|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    out << "| " << r.task << " | " << r.variant << " | " << fixed(r.success_mean, 3) << " ± " << fixed(r.success_std, 3)
        << " | " << fixed(r.norm_dist_mean, 3) << " ± " << fixed(r.norm_dist_std, 3) << " | " << r.seeds << " | "
        << r.trajectories << " |\n";
  }
  return out.str();
}

std::vector<ResultRow> report(const fs::path& run_dir) {
  return aggregate(parse_samples_csv(read_file(run_dir / "samples.csv")));
}

}  // namespace quadplan::harness
