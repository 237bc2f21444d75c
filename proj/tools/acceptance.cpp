// SPDX-License-Identifier: Apache-2.0
// quadplan_acceptance: one PASS/FAIL line per acceptance criterion.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "quadplan/benchmarks.hpp"
#include "quadplan/dsl/parser.hpp"
#include "quadplan/dsl/validator.hpp"
#include "quadplan/harness/corpus.hpp"
#include "quadplan/harness/experiment.hpp"
#include "quadplan/rng.hpp"
#include "quadplan/skills.hpp"

namespace fs = std::filesystem;
using namespace quadplan;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fixed(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

const std::vector<std::uint64_t> kSeeds{0, 1, 2};
constexpr int kTrajectories = 100;

struct GoldenRun {
  // success rate per (task, seed)
  std::map<std::string, std::map<std::uint64_t, double>> success;
  std::vector<double> light_success_norm_dist;
  double seconds = 0.0;
};

/// Executes the golden plan of every task without replanning.
GoldenRun run_golden(const fs::path& root, const std::string& noise) {
  const auto t0 = std::chrono::steady_clock::now();
  GoldenRun out;
  RunConfig rc;
  rc.noise = NoiseRegime::preset(noise);
  rc.replan_budget = 0;
  for (TaskKind task : all_tasks()) {
    const std::string name(task_name(task));
    const dsl::Program plan = dsl::parse_program(slurp(root / "data/plans/golden" / (name + ".plan")));
    for (std::uint64_t seed : kSeeds) {
      int ok = 0;
      for (int k = 0; k < kTrajectories; ++k) {
        TaskConfig cfg;
        cfg.task = task;
        cfg.seed = harness::trajectory_seed(seed, task, 0, k);
        rc.seed = mix_seed(cfg.seed, 0xE7EC);
        const ExecutionTrace tr = execute(plan, build_scene(cfg), rc);
        const MetricSample m = measure(task, tr, rc.time_limit);
        ok += m.success;
        if (task == TaskKind::LightSwitching && m.success) out.light_success_norm_dist.push_back(m.norm_dist);
      }
      out.success[name][seed] = static_cast<double>(ok) / kTrajectories;
    }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

Verdict golden_success(const GoldenRun& g) {
  Verdict v{true, ""};
  for (const auto& [task, by_seed] : g.success) {
    double sum = 0.0;
    for (const auto& [seed, s] : by_seed) sum += s;
    const double mean = sum / static_cast<double>(by_seed.size());
    v.pass = v.pass && mean >= 0.90;
    v.detail += task + " " + fixed(mean) + ", ";
  }
  v.pass = v.pass && g.seconds < 300.0;
  v.detail += "runtime " + fixed(g.seconds, 1) + " s";
  return v;
}

Verdict light_norm_dist(const GoldenRun& g) {
  double worst = 0.0;
  for (double d : g.light_success_norm_dist) worst = std::max(worst, d);
  return {!g.light_success_norm_dist.empty() && worst <= 0.05,
          std::to_string(g.light_success_norm_dist.size()) + " successes, max NormDist " + fixed(worst, 4)};
}

/// Seed-level success of one variant from experiment samples.
std::map<std::uint64_t, double> by_seed(const std::vector<harness::SampleRow>& rows, const std::string& task,
                                        const std::string& variant) {
  std::map<std::uint64_t, std::pair<int, int>> acc;
  for (const auto& r : rows) {
    if (r.task != task || r.variant != variant) continue;
    acc[r.seed].first += r.success;
    acc[r.seed].second += 1;
  }
  std::map<std::uint64_t, double> out;
  for (const auto& [seed, a] : acc) out[seed] = static_cast<double>(a.first) / a.second;
  return out;
}

Verdict replanner_gain(const fs::path& root) {
  harness::ExperimentSpec spec;
  spec.tasks = {TaskKind::LightSwitching};
  spec.variants = {agents::Variant::SPCR, agents::Variant::SPC};
  spec.fixtures = root / "data/fixtures";
  spec.touch_overshoot = 0.1;
  const auto result = harness::run_experiment(spec);
  const auto with = by_seed(result.samples, "light", "S+P+C+R");
  const auto without = by_seed(result.samples, "light", "S+P+C");
  Verdict v{with.size() == kSeeds.size(), ""};
  for (const auto& [seed, s] : with) {
    const double gap = s - without.at(seed);
    v.pass = v.pass && gap >= 0.3;
    v.detail += "seed " + std::to_string(seed) + ": " + fixed(s) + " vs " + fixed(without.at(seed)) + ", ";
  }
  v.detail.resize(v.detail.size() - 2);
  return v;
}

Verdict finetuning_helps(const GoldenRun& tuned, const GoldenRun& raw) {
  Verdict v{true, ""};
  for (const auto& [task, seeds] : tuned.success) {
    double t = 0.0;
    double r = 0.0;
    for (const auto& [seed, s] : seeds) {
      const double base = raw.success.at(task).at(seed);
      v.pass = v.pass && s >= base;
      t += s;
      r += base;
    }
    v.detail += task + " " + fixed(t / 3) + " vs " + fixed(r / 3) + ", ";
  }
  v.detail.resize(v.detail.size() - 2);
  return v;
}

/// Stair stack of `rises` starting at x = 0, robot on the ground before it.
Scene stair_stack(const std::vector<double>& rises, double depth) {
  Scene s;
  place_robot(s.robot, s.limits, -0.5, 0.0, 0.0, Stance::Quadrupedal);
  double total = 0.0;
  for (double r : rises) total += r;
  const double n = static_cast<double>(rises.size());
  ObjectSpec o;
  o.id = "stairs";
  o.kind = StairsKind{rises, depth};
  o.pose.position = {n * depth / 2, 0, 0};
  o.size = {n * depth, 1.2, total};
  add_object(s, o);
  return s;
}

Verdict climb_oracle() {
  Rng rng(7331);
  int agree = 0;
  int feasible = 0;
  const int trials = 1000;
  std::string first_miss;
  for (int trial = 0; trial < trials; ++trial) {
    const int n = rng.uniform_int(1, 5);
    std::vector<double> rises;
    for (int k = 0; k < n; ++k) rises.push_back(rng.uniform(0.05, 0.5));
    const double depth = 0.55;
    Scene s = stair_stack(rises, depth);

    // Brute force: every rise, the first from the ground included, within the limit.
    bool brute = true;
    double top = 0.0;
    for (double r : rises) {
      brute = brute && r <= s.limits.max_step_height;
      top += r;
    }
    feasible += brute;
    const Vec3 target{(n - 0.5) * depth, 0.0, top};

    const bool checked = check_climb(s, target).feasible;
    Scene run = s;
    const bool executed = climb_to_position(run, target, NoiseRegime::zero()).ok();
    char call[128];
    std::snprintf(call, sizeof call, "climb_to_position(%.17g, 0, %.17g)", target.x, top);
    const auto faults = dsl::validate_plan(dsl::parse_program(call), std::vector<Scene>{s});
    const bool validated = faults.empty();
    if (checked == brute && executed == brute && validated == brute) {
      ++agree;
    } else if (first_miss.empty()) {
      first_miss = ", first disagreement at trial " + std::to_string(trial) + " (check " + std::to_string(checked) +
                   ", skill " + std::to_string(executed) + ", validator " + std::to_string(validated) + ", oracle " +
                   std::to_string(brute) + (faults.empty() ? "" : ", " + faults.front().rule) + ")";
    }
  }
  return {agree == trials, std::to_string(agree) + "/" + std::to_string(trials) + " stacks agree (" +
                               std::to_string(feasible) + " climbable)" + first_miss};
}

Verdict determinism(const fs::path& root) {
  harness::ExperimentSpec spec;
  spec.tasks = {TaskKind::LightSwitching};
  spec.variants = {agents::Variant::SPCR};
  spec.code_runs = 1;
  spec.seeds = {0};
  spec.fixtures = root / "data/fixtures";
  spec.threads = 1;
  const auto a = harness::run_experiment(spec);
  spec.threads = 4;
  const auto b = harness::run_experiment(spec);
  std::size_t same = 0;
  for (std::size_t i = 0; i < std::min(a.samples.size(), b.samples.size()); ++i) {
    same += a.samples[i].trace_hash == b.samples[i].trace_hash;
  }
  return {a.samples.size() == 100 && b.samples.size() == 100 && same == 100,
          std::to_string(same) + "/" + std::to_string(a.samples.size()) + " trace hashes identical"};
}

Verdict dsl_integrity(const fs::path& root) {
  const harness::CorpusReport rep = harness::classify_corpus(root / "data/plans");
  std::size_t roundtrip = 0;
  std::size_t planted = 0;
  std::size_t planted_ok = 0;
  std::size_t golden_faults = 0;
  for (const auto& f : rep.files) {
    roundtrip += f.roundtrip;
    if (f.entry.group == "planted") {
      ++planted;
      planted_ok += f.ok();
    }
    if (f.entry.group == "golden") golden_faults += f.faults.size();
  }
  const std::size_t n = rep.files.size();
  return {n >= 60 && roundtrip == n && planted_ok == planted && planted > 0 && golden_faults == 0 && rep.passed() == n,
          std::to_string(n) + " plans, " + std::to_string(roundtrip) + " round-trip, " + std::to_string(planted_ok) +
              "/" + std::to_string(planted) + " planted faults classified, " + std::to_string(golden_faults) +
              " golden false positives"};
}

Verdict protocol(const fs::path& root) {
  const harness::ExperimentSpec defaults;
  const bool ok_defaults =
      defaults.temperature == 0.2 && defaults.code_runs == 3 && defaults.trajectories_per_code == 100;
  harness::ExperimentSpec spec;
  spec.backend = harness::BackendKind::Mock;
  spec.fixtures = root / "data/fixtures";
  spec.code_runs = 1;
  spec.trajectories_per_code = 5;
  spec.seeds = {0};
  const auto result = harness::run_experiment(spec);
  const bool ok_pipeline = result.table.size() == 16 && result.plans.size() == 16;
  return {ok_defaults && ok_pipeline, "temperature " + fixed(defaults.temperature, 1) + ", code runs " +
                                          std::to_string(defaults.code_runs) + ", trajectories " +
                                          std::to_string(defaults.trajectories_per_code) + ", mock pipeline " +
                                          std::to_string(result.table.size()) + " task/variant rows"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadplan_acceptance: acceptance criteria, one line each"};
  std::string root = ".";
  app.add_option("--root", root, "Repository root (data/ lives here)");
  CLI11_PARSE(app, argc, argv);

  int failed = 0;
  auto line = [&](int id, const std::string& name, const std::function<Verdict()>& check) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << v.detail << std::endl;
  };

  GoldenRun tuned;
  GoldenRun raw;
  line(1, "golden plans succeed >= 0.90 under chained-finetuned noise within 5 min", [&] {
    tuned = run_golden(root, "chained-finetuned");
    return golden_success(tuned);
  });
  line(2, "successful light trajectories end within NormDist 0.05", [&] { return light_norm_dist(tuned); });
  line(3, "replanner recovers an injected touch failure (S+P+C+R - S+P+C >= 0.3 per seed)",
       [&] { return replanner_gain(root); });
  line(4, "chained-finetuned success >= raw success per task and seed", [&] {
    raw = run_golden(root, "raw");
    return finetuning_helps(tuned, raw);
  });
  line(5, "climb verdicts match brute-force rise enumeration", [&] { return climb_oracle(); });
  line(6, "identical trace hashes across two runs of a 100-trajectory batch", [&] { return determinism(root); });
  line(7, "plan corpus round-trips and faults get their planted category", [&] { return dsl_integrity(root); });
  line(8, "protocol defaults and offline mock pipeline", [&] { return protocol(root); });

  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria fail") << std::endl;
  return failed == 0 ? 0 : 1;
}
