// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace quadplan::harness {

/// Recomputes prompt_sha256 in every <root>/<task>/index.json by running the
/// cascade of each non-replanning variant on the seed-0 scene of the task and
/// recording which fixture answers each prompt (chosen by role and variant).
/// Returns one line per updated fixture.
std::vector<std::string> rehash_fixtures(const std::filesystem::path& root);

}  // namespace quadplan::harness
