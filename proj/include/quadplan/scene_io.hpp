// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "quadplan/world.hpp"

namespace quadplan {

/// Scene file codec. Top-level keys: objects, robot, limits, bounds, seed,
/// plus the optional `params` table. Snapshots additionally carry the runtime
/// keys clock, events, scheduled, elevator and rng_state. Any other key, at any
/// level, is rejected with WorldError::InvalidScene.
nlohmann::json scene_to_json(const Scene& scene, bool include_runtime = false);
Scene scene_from_json(const nlohmann::json& doc);

Scene load_scene(const std::filesystem::path& path);
void save_scene(const Scene& scene, const std::filesystem::path& path);

nlohmann::json vec3_to_json(Vec3 v);
Vec3 vec3_from_json(const nlohmann::json& j);
nlohmann::json robot_to_json(const RobotState& robot);

}  // namespace quadplan
