// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quadplan/benchmarks.hpp"
#include "quadplan/dsl/validator.hpp"

namespace quadplan::harness {

struct ExpectedFault {
  dsl::FaultCategory category = dsl::FaultCategory::Logical;
  std::size_t location = 0;
};

/// One plan of a corpus. Scenes come from the task generator (`seeds`) and
/// from scene files relative to the corpus directory.
struct CorpusEntry {
  std::string file;
  std::string group;  // golden, replan, planted, ...
  std::optional<TaskKind> task;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> scenes;
  std::vector<ExpectedFault> expected;
  std::string note;
};

/// Reads `dir`/manifest.json:
/// {"plans": [{"file", "group", "task", "seeds", "scenes", "expected": [{"category", "location"}], "note"}]}
std::vector<CorpusEntry> load_manifest(const std::filesystem::path& dir);

struct FileVerdict {
  CorpusEntry entry;
  std::optional<std::string> parse_error;
  bool roundtrip = false;
  std::vector<dsl::PlanFault> faults;
  std::vector<ExpectedFault> missing;
  /// Faults whose (category, location) is not expected.
  std::vector<dsl::PlanFault> unexpected;

  [[nodiscard]] bool ok() const { return !parse_error && roundtrip && missing.empty() && unexpected.empty(); }
};

struct CorpusReport {
  std::vector<FileVerdict> files;

  [[nodiscard]] std::size_t passed() const;
  /// Fault counts by group and category name.
  [[nodiscard]] std::map<std::string, std::map<std::string, int>> taxonomy() const;
};

/// Parses, round-trips and validates every plan in the manifest.
CorpusReport classify_corpus(const std::filesystem::path& dir);

std::string taxonomy_table(const CorpusReport& report);
/// group,plans,spatial,constraint_violation,logical
std::string taxonomy_csv(const CorpusReport& report);

}  // namespace quadplan::harness
