// SPDX-License-Identifier: Apache-2.0
#include "quadplan/harness/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "quadplan/dsl/parser.hpp"
#include "quadplan/dsl/printer.hpp"
#include "quadplan/harness/experiment.hpp"
#include "quadplan/scene_io.hpp"

namespace quadplan::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HarnessError(HarnessError::Kind::Io, "cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

bool matches(const dsl::PlanFault& f, const ExpectedFault& e) {
  return f.category == e.category && f.location == e.location;
}

}  // namespace

std::vector<CorpusEntry> load_manifest(const fs::path& dir) {
  json doc;
  try {
    doc = json::parse(slurp(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw HarnessError(HarnessError::Kind::Io, (dir / "manifest.json").string() + ": " + e.what());
  }
  std::vector<CorpusEntry> out;
  try {
    for (const auto& p : doc.at("plans")) {
      CorpusEntry e;
      e.file = p.at("file").get<std::string>();
      e.group = p.value("group", "");
      if (p.contains("task")) e.task = task_from_name(p["task"].get<std::string>());
      e.seeds = p.value("seeds", std::vector<std::uint64_t>{});
      e.scenes = p.value("scenes", std::vector<std::string>{});
      e.note = p.value("note", "");
      for (const auto& x : p.value("expected", json::array())) {
        const auto cat = dsl::fault_category_from_name(x.at("category").get<std::string>());
        if (!cat) throw HarnessError(HarnessError::Kind::Io, e.file + ": unknown category " + x["category"].dump());
        e.expected.push_back({*cat, x.at("location").get<std::size_t>()});
      }
      out.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw HarnessError(HarnessError::Kind::Io, (dir / "manifest.json").string() + ": " + e.what());
  } catch (const BenchmarkError& e) {
    throw HarnessError(HarnessError::Kind::Io, (dir / "manifest.json").string() + ": " + e.what());
  }
  return out;
}

std::size_t CorpusReport::passed() const {
  return static_cast<std::size_t>(std::count_if(files.begin(), files.end(), [](const auto& f) { return f.ok(); }));
}

std::map<std::string, std::map<std::string, int>> CorpusReport::taxonomy() const {
  std::map<std::string, std::map<std::string, int>> out;
  for (const auto& f : files) {
    auto& row = out[f.entry.group];
    for (auto c : {dsl::FaultCategory::Spatial, dsl::FaultCategory::ConstraintViolation, dsl::FaultCategory::Logical}) {
      row.try_emplace(std::string(dsl::fault_category_name(c)), 0);
    }
    for (const auto& fault : f.faults) ++row[std::string(dsl::fault_category_name(fault.category))];
  }
  return out;
}

CorpusReport classify_corpus(const fs::path& dir) {
  CorpusReport report;
  for (const auto& entry : load_manifest(dir)) {
    FileVerdict v;
    v.entry = entry;
    dsl::Program program;
    try {
      program = dsl::parse_program(slurp(dir / entry.file));
      const std::string printed = dsl::print_program(program);
      const dsl::Program again = dsl::parse_program(printed);
      v.roundtrip = dsl::equal(program, again) && dsl::print_program(again) == printed;
    } catch (const dsl::SyntaxError& e) {
      v.parse_error = e.what();
      report.files.push_back(std::move(v));
      continue;
    }
    std::vector<Scene> scenes;
    if (entry.task) {
      for (auto seed : entry.seeds) {
        TaskConfig cfg;
        cfg.task = *entry.task;
        cfg.seed = seed;
        scenes.push_back(build_scene(cfg));
      }
    }
    for (const auto& s : entry.scenes) scenes.push_back(load_scene(dir / s));
    v.faults = dsl::validate_plan(program, scenes);
    for (const auto& e : entry.expected) {
      if (std::none_of(v.faults.begin(), v.faults.end(), [&](const auto& f) { return matches(f, e); })) {
        v.missing.push_back(e);
      }
    }
    for (const auto& f : v.faults) {
      if (std::none_of(entry.expected.begin(), entry.expected.end(), [&](const auto& e) { return matches(f, e); })) {
        v.unexpected.push_back(f);
      }
    }
    report.files.push_back(std::move(v));
  }
  return report;
}

std::string taxonomy_table(const CorpusReport& report) {
  std::ostringstream out;
  out << "| Group | Plans | Spatial | Constraint Violation | Logical |\n|---|---|---|---|---|\n";
  std::map<std::string, int> plans;
  for (const auto& f : report.files) ++plans[f.entry.group];
  for (const auto& [group, counts] : report.taxonomy()) {
    out << "| " << group << " | " << plans[group] << " | " << counts.at(std::string(dsl::fault_category_name(dsl::FaultCategory::Spatial)))
        << " | " << counts.at(std::string(dsl::fault_category_name(dsl::FaultCategory::ConstraintViolation))) << " | "
        << counts.at(std::string(dsl::fault_category_name(dsl::FaultCategory::Logical))) << " |\n";
  }
  return out.str();
}

std::string taxonomy_csv(const CorpusReport& report) {
  std::ostringstream out;
  out << "group,plans,spatial,constraint_violation,logical\n";
  std::map<std::string, int> plans;
  for (const auto& f : report.files) ++plans[f.entry.group];
  for (const auto& [group, counts] : report.taxonomy()) {
    out << group << "," << plans[group] << "," << counts.at(std::string(dsl::fault_category_name(dsl::FaultCategory::Spatial)))
        << "," << counts.at(std::string(dsl::fault_category_name(dsl::FaultCategory::ConstraintViolation))) << ","
        << counts.at(std::string(dsl::fault_category_name(dsl::FaultCategory::Logical))) << "\n";
  }
  return out.str();
}

}  // namespace quadplan::harness
