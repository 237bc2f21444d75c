// SPDX-License-Identifier: Apache-2.0
// quadplan: command-line harness.
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "quadplan/benchmarks.hpp"
#include "quadplan/dsl/parser.hpp"
#include "quadplan/dsl/validator.hpp"
#include "quadplan/harness/corpus.hpp"
#include "quadplan/harness/experiment.hpp"
#include "quadplan/harness/fixtures.hpp"
#include "quadplan/harness/server.hpp"
#include "quadplan/scene_io.hpp"
#include "quadplan/skill_catalog.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace quadplan;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << text;
}

std::vector<Scene> scenes_for(const std::vector<std::string>& files, const std::string& task,
                              const std::vector<std::uint64_t>& seeds) {
  std::vector<Scene> out;
  for (const auto& f : files) out.push_back(load_scene(f));
  if (!task.empty()) {
    for (auto s : seeds) {
      TaskConfig cfg;
      cfg.task = task_from_name(task);
      cfg.seed = s;
      out.push_back(build_scene(cfg));
    }
  }
  return out;
}

std::atomic<bool> g_stop{false};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadplan: plan, validate and execute quadruped task plans"};
  app.require_subcommand(1);

  // catalog
  std::string catalog_out;
  auto* catalog = app.add_subcommand("catalog", "Print the robot skill catalog as Markdown");
  catalog->add_option("--out", catalog_out, "Output file (default stdout)");

  // scene
  std::string scene_task;
  std::uint64_t scene_seed = 0;
  std::string scene_out;
  auto* scene = app.add_subcommand("scene", "Generate a task scene as JSON");
  scene->add_option("task", scene_task, "light | delivery | bridge | elevator")->required();
  scene->add_option("--seed", scene_seed);
  scene->add_option("--out", scene_out);

  // validate
  std::string val_plan;
  std::vector<std::string> val_scenes;
  std::string val_task;
  std::vector<std::uint64_t> val_seeds{0};
  auto* validate = app.add_subcommand("validate", "Report faults of a plan (exit 2 when any)");
  validate->add_option("plan", val_plan)->required()->check(CLI::ExistingFile);
  validate->add_option("scene", val_scenes, "Scene JSON file(s)")->check(CLI::ExistingFile);
  validate->add_option("--task", val_task, "Generate scenes for this task");
  validate->add_option("--seed", val_seeds, "Scene seeds for --task");

  // simulate
  std::string sim_plan;
  std::string sim_task;
  std::uint64_t sim_seed = 0;
  std::string sim_noise = "chained-finetuned";
  std::string sim_trace;
  double sim_limit = 300.0;
  bool sim_unchecked = false;
  auto* simulate = app.add_subcommand("simulate", "Execute a plan once without replanning");
  simulate->add_option("plan", sim_plan)->required()->check(CLI::ExistingFile);
  simulate->add_option("--task", sim_task)->required();
  simulate->add_option("--seed", sim_seed);
  simulate->add_option("--noise", sim_noise, "zero | raw | chained-finetuned");
  simulate->add_option("--trace", sim_trace, "Write the JSONL trace here");
  simulate->add_option("--time-limit", sim_limit);
  simulate->add_flag("--unchecked", sim_unchecked, "Run even when the plan has a constraint violation");

  // run
  std::string run_spec;
  std::string run_out;
  int run_threads = -1;
  bool run_save = false;
  auto* run = app.add_subcommand("run", "Run an experiment spec");
  run->add_option("spec", run_spec)->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_out, "Run directory");
  run->add_option("--threads", run_threads);
  run->add_flag("--save-traces", run_save);

  // report
  std::string report_dir;
  auto* report = app.add_subcommand("report", "Aggregate samples.csv of a run directory");
  report->add_option("run_dir", report_dir)->required()->check(CLI::ExistingDirectory);

  // classify
  std::string corpus_dir;
  bool classify_json = false;
  std::string classify_csv;
  auto* classify = app.add_subcommand("classify", "Classify the faults of a plan corpus");
  classify->add_option("corpus", corpus_dir)->required()->check(CLI::ExistingDirectory);
  classify->add_flag("--json", classify_json, "Per-file verdicts as JSON");
  classify->add_option("--csv", classify_csv, "Also write the taxonomy counts as CSV here");

  // serve
  std::string serve_task;
  std::uint64_t serve_seed = 0;
  std::string serve_host = "127.0.0.1";
  int serve_port = 8765;
  int serve_pace = 250;
  double serve_hrp = 1.0;
  bool serve_paused = false;
  std::string serve_fixtures = "data/fixtures";
  auto* serve = app.add_subcommand("serve", "Run one live trajectory behind the operator HTTP/SSE API");
  serve->add_option("task", serve_task)->required();
  serve->add_option("--seed", serve_seed);
  serve->add_option("--host", serve_host);
  serve->add_option("--port", serve_port);
  serve->add_option("--pace-ms", serve_pace, "Wall-clock delay per skill boundary");
  serve->add_option("--human-response-prob", serve_hrp);
  serve->add_option("--fixtures", serve_fixtures);
  serve->add_flag("--paused", serve_paused, "Start paused");

  // fixtures rehash
  std::string fx_dir = "data/fixtures";
  auto* fixtures = app.add_subcommand("fixtures", "Maintain mock LLM fixtures");
  fixtures->require_subcommand(1);
  auto* rehash = fixtures->add_subcommand("rehash", "Recompute prompt hashes in index.json files");
  rehash->add_option("dir", fx_dir)->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*catalog) {
      emit("# Robot skills\n\n" + SkillCatalog::standard().render_text(), catalog_out);
      return 0;
    }
    if (*scene) {
      TaskConfig cfg;
      cfg.task = task_from_name(scene_task);
      cfg.seed = scene_seed;
      emit(scene_to_json(build_scene(cfg)).dump(2) + "\n", scene_out);
      return 0;
    }
    if (*validate) {
      const dsl::Program program = dsl::parse_program(slurp(val_plan));
      const auto faults = dsl::validate_plan(program, scenes_for(val_scenes, val_task, val_seeds));
      json out = json::array();
      for (const auto& f : faults) out.push_back(dsl::fault_to_json(f));
      std::cout << out.dump(2) << "\n";
      return faults.empty() ? 0 : 2;
    }
    if (*simulate) {
      TaskConfig cfg;
      cfg.task = task_from_name(sim_task);
      cfg.seed = sim_seed;
      RunConfig rc;
      rc.noise = NoiseRegime::preset(sim_noise);
      rc.seed = sim_seed;
      rc.time_limit = sim_limit;
      rc.replan_budget = 0;
      rc.reject_constraint_violations = !sim_unchecked;
      const ExecutionTrace tr = execute(dsl::parse_program(slurp(sim_plan)), build_scene(cfg), rc);
      if (!sim_trace.empty()) emit(tr.to_jsonl(), sim_trace);
      const MetricSample m = measure(cfg.task, tr, sim_limit);
      std::cout << json{{"outcome", outcome_name(tr.outcome)},
                        {"detail", tr.outcome_detail},
                        {"success", m.success},
                        {"norm_dist", m.norm_dist},
                        {"clock", m.clock},
                        {"trace_hash", tr.hash()}}
                       .dump(2)
                << "\n";
      return 0;
    }
    if (*run) {
      harness::ExperimentSpec spec = harness::load_spec(run_spec);
      if (run_threads >= 0) spec.threads = run_threads;
      if (run_save) spec.save_traces = true;
      const auto result = harness::run_experiment(spec, run_out);
      std::cout << harness::render_table(result.table);
      if (!run_out.empty()) std::cout << "artifacts in " << run_out << "\n";
      return 0;
    }
    if (*report) {
      std::cout << harness::render_table(harness::report(report_dir));
      return 0;
    }
    if (*classify) {
      const auto rep = harness::classify_corpus(corpus_dir);
      if (!classify_csv.empty()) emit(harness::taxonomy_csv(rep), classify_csv);
      if (classify_json) {
        json out = json::array();
        for (const auto& f : rep.files) {
          json faults = json::array();
          for (const auto& x : f.faults) faults.push_back(dsl::fault_to_json(x));
          json j{{"file", f.entry.file}, {"group", f.entry.group}, {"ok", f.ok()}, {"roundtrip", f.roundtrip},
                 {"faults", faults}};
          if (f.parse_error) j["parse_error"] = *f.parse_error;
          out.push_back(j);
        }
        std::cout << out.dump(2) << "\n";
      } else {
        for (const auto& f : rep.files) {
          if (f.ok()) continue;
          std::cout << "MISMATCH " << f.entry.file;
          if (f.parse_error) std::cout << " parse error: " << *f.parse_error;
          if (!f.roundtrip) std::cout << " (round trip differs)";
          for (const auto& m : f.missing) {
            std::cout << " missing " << dsl::fault_category_name(m.category) << "@" << m.location;
          }
          for (const auto& u : f.unexpected) {
            std::cout << " unexpected " << dsl::fault_category_name(u.category) << "@" << u.location << " (" << u.rule
                      << ")";
          }
          std::cout << "\n";
        }
        std::cout << harness::taxonomy_table(rep);
        std::cout << rep.passed() << "/" << rep.files.size() << " plans classified as expected\n";
      }
      return rep.passed() == rep.files.size() ? 0 : 2;
    }
    if (*serve) {
      harness::SessionOptions opt;
      opt.scene.task = task_from_name(serve_task);
      opt.scene.seed = serve_seed;
      opt.scene.human_response_prob = serve_hrp;
      opt.run.seed = serve_seed;
      opt.fixtures = serve_fixtures;
      opt.pace = std::chrono::milliseconds(serve_pace);
      opt.start_paused = serve_paused;
      harness::Session session(opt);
      harness::Server server(session);
      const int port = server.start(serve_host, serve_port);
      std::cout << "session " << session.id() << " on http://" << serve_host << ":" << port << std::endl;
      std::signal(SIGINT, [](int) { g_stop = true; });
      std::signal(SIGTERM, [](int) { g_stop = true; });
      session.start();
      while (!g_stop && session.status() != harness::Session::Status::Finished) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
      }
      if (!g_stop) {
        std::cout << session.state().dump() << std::endl;
        // Leave the final state readable until interrupted.
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      } else {
        std::_Exit(130);
      }
      server.stop();
      return 0;
    }
    if (*fixtures && *rehash) {
      const auto lines = harness::rehash_fixtures(fx_dir);
      for (const auto& l : lines) std::cout << l << "\n";
      std::cout << lines.size() << " fixture hashes updated\n";
      return 0;
    }
  } catch (const harness::HarnessError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == harness::HarnessError::Kind::PortInUse ? 3 : 1;
  } catch (const dsl::SyntaxError& e) {
    std::cerr << "syntax error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
