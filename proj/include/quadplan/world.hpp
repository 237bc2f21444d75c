// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "quadplan/geometry.hpp"
#include "quadplan/rng.hpp"

namespace quadplan {

class WorldError : public std::runtime_error {
 public:
  enum class Kind { OutOfBounds, UnknownEvent, UnknownObject, InvalidScene };

  WorldError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  [[nodiscard]] Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

enum class Direction { Up, Down };

// Object kinds. Positions are the bottom-center of the bounding box.

struct BoxKind {
  friend bool operator==(const BoxKind&, const BoxKind&) = default;
};

/// Fixed stairs ascending along +x. step_heights are the individual rises.
struct StairsKind {
  std::vector<double> step_heights;
  double step_depth = 0.0;
  friend bool operator==(const StairsKind&, const StairsKind&) = default;
};

/// Wall-mounted push button. When `opens` names a door, firing opens it.
struct ButtonKind {
  std::string event;
  std::string opens;
  friend bool operator==(const ButtonKind&, const ButtonKind&) = default;
};

/// Doorbell. A human answers with `response_prob` after `response_delay`
/// seconds by firing `response_event`, which opens `opens`.
struct BellKind {
  std::string event;
  std::string response_event = "door_opened";
  std::string opens;
  double response_prob = 1.0;
  double response_delay = 5.0;
  friend bool operator==(const BellKind&, const BellKind&) = default;
};

struct DoorKind {
  bool open = false;
  friend bool operator==(const DoorKind&, const DoorKind&) = default;
};

struct PlatformKind {
  friend bool operator==(const PlatformKind&, const PlatformKind&) = default;
};

struct PackageKind {
  friend bool operator==(const PackageKind&, const PackageKind&) = default;
};

/// Marker for a trench the robot cannot stand in. Not solid.
struct GapKind {
  double width = 0.0;
  friend bool operator==(const GapKind&, const GapKind&) = default;
};

struct WallKind {
  friend bool operator==(const WallKind&, const WallKind&) = default;
};

/// Hall call button. `door` and `platform` name the cabin door and floor plate.
struct ElevatorCallKind {
  Direction direction = Direction::Up;
  std::string door;
  std::string platform;
  double arrival_delay = 8.0;
  friend bool operator==(const ElevatorCallKind&, const ElevatorCallKind&) = default;
};

/// Cabin panel: one button per floor stacked upward from the panel bottom,
/// button i centered at z = bottom + (i + 0.5) * button_spacing.
struct ElevatorPanelKind {
  std::vector<int> floors;
  double button_spacing = 0.12;
  double travel_time_per_floor = 4.0;
  std::string door;
  std::string platform;
  friend bool operator==(const ElevatorPanelKind&, const ElevatorPanelKind&) = default;
};

using ObjectKind = std::variant<BoxKind, StairsKind, ButtonKind, BellKind, DoorKind, PlatformKind,
                                PackageKind, GapKind, WallKind, ElevatorCallKind, ElevatorPanelKind>;

std::string_view kind_name(const ObjectKind& kind);

struct ObjectSpec {
  std::string id;
  ObjectKind kind;
  Pose pose;
  Vec3 size;
  bool movable = false;
  double mass = 0.0;

  [[nodiscard]] Aabb bounds() const;
  [[nodiscard]] double top_z() const { return pose.position.z + size.z; }
  /// Geometric center of the bounding box.
  [[nodiscard]] Vec3 center() const { return pose.position + Vec3{0, 0, size.z * 0.5}; }
  /// Solid objects block motion and support things on top of them.
  [[nodiscard]] bool solid() const;
  /// Top surface height at (x, y), or nullopt outside the footprint.
  [[nodiscard]] std::optional<double> top_at(double x, double y) const;

  template <typename K>
  [[nodiscard]] bool is() const {
    return std::holds_alternative<K>(kind);
  }
  template <typename K>
  [[nodiscard]] const K& as() const {
    return std::get<K>(kind);
  }
  template <typename K>
  [[nodiscard]] K& as() {
    return std::get<K>(kind);
  }

  friend bool operator==(const ObjectSpec&, const ObjectSpec&) = default;
};

/// True iff the closed bounding boxes intersect with positive volume.
bool aabb_overlap(const ObjectSpec& a, const ObjectSpec& b);

struct RobotLimits {
  double max_step_height = 0.35;
  double bipedal_reach_height = 0.85;
  Vec3 quad_body{0.6, 0.3, 0.35};
  double push_mass_limit = 10.0;
  double reach_radius = 0.35;
  double walk_speed = 0.5;
  double push_speed = 0.2;
  double bipedal_body_height = 0.75;
  double touch_epsilon = 0.05;
  double step_depth_min = 0.25;
  /// Dips in the ground profile no longer than this are stepped over.
  double step_over_gap = 0.10;
  /// Slips end Fallen instead of on the last stable surface.
  bool hard_fall = false;

  /// Half the body diagonal; used to inflate obstacles for navigation.
  [[nodiscard]] double body_radius() const { return 0.5 * std::hypot(quad_body.x, quad_body.y); }

  friend bool operator==(const RobotLimits&, const RobotLimits&) = default;
};

enum class Stance { Quadrupedal, Bipedal, Fallen };
std::string_view stance_name(Stance stance);

struct RobotState {
  Pose base;
  Stance stance = Stance::Quadrupedal;
  double support_height = 0.0;
  std::optional<Vec3> toe;
  int floor = 1;

  friend bool operator==(const RobotState&, const RobotState&) = default;
};

/// Base height above the support surface for a stance (body center).
double stance_base_height(const RobotLimits& limits, Stance stance);

/// Places the robot base at (x, y) standing on `support` in `stance`.
void place_robot(RobotState& robot, const RobotLimits& limits, double x, double y, double support,
                 Stance stance);

/// Axis-aligned box around the robot body in its current stance.
Aabb robot_body_bounds(const RobotState& robot, const RobotLimits& limits);

struct Bounds {
  double min_x = -5.0;
  double min_y = -5.0;
  double max_x = 5.0;
  double max_y = 5.0;

  [[nodiscard]] bool contains(double x, double y) const {
    return x >= min_x && x <= max_x && y >= min_y && y <= max_y;
  }
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct ScheduledEvent {
  double time = 0.0;
  std::string event;
  friend bool operator==(const ScheduledEvent&, const ScheduledEvent&) = default;
};

struct ElevatorState {
  int cabin_floor = 1;
  std::optional<Direction> direction;
  std::optional<int> selected_floor;
  friend bool operator==(const ElevatorState&, const ElevatorState&) = default;
};

/// World snapshot. Value type: copying a Scene yields an independent world.
struct Scene {
  std::map<std::string, ObjectSpec> objects;
  RobotState robot;
  RobotLimits limits;
  std::set<std::string> events;
  Bounds bounds;
  std::uint64_t seed = 0;
  Rng rng;
  double clock = 0.0;
  std::vector<ScheduledEvent> scheduled;
  std::optional<ElevatorState> elevator;
  /// Task-level scalars exposed to plans (e.g. target_floor).
  std::map<std::string, double> params;

  [[nodiscard]] const ObjectSpec& object(std::string_view id) const;
  [[nodiscard]] ObjectSpec& object(std::string_view id);
  [[nodiscard]] bool has_object(std::string_view id) const;

  friend bool operator==(const Scene&, const Scene&) = default;
};

/// Adds an object; throws InvalidScene on duplicate ids or bad geometry.
void add_object(Scene& scene, ObjectSpec object);

/// Top z of the highest solid object whose footprint contains (x, y), 0 if none.
double support_height_at(const Scene& scene, double x, double y,
                         std::optional<std::string_view> excluding = std::nullopt);

/// Highest support under any point of a footprint (used for settling objects).
double support_under_footprint(const Scene& scene, const Aabb& footprint,
                               std::optional<std::string_view> excluding = std::nullopt);

/// Lowest bottom of a solid object above `above_z` covering (x, y); nullopt if open sky.
std::optional<double> ceiling_at(const Scene& scene, double x, double y, double above_z);

/// Every event some object in the scene can produce.
std::set<std::string> defined_events(const Scene& scene);

/// Records `event` and applies its scripted consequence.
void fire_event(Scene& scene, const std::string& event);

/// Advances the clock to `time`, firing scheduled events that come due, in order.
/// Returns the events fired.
std::vector<std::string> advance_clock(Scene& scene, double time);

/// Earliest scheduled firing time of `event`, if any.
std::optional<double> scheduled_time(const Scene& scene, const std::string& event);

/// Drops every movable object onto the surface beneath it (lowest first).
void settle(Scene& scene);

/// Checks construction invariants; throws WorldError::InvalidScene.
void validate_scene(const Scene& scene);

/// Center of the touchable target of a mounted object (buttons, bells, calls).
/// For panels, the center of the button for `floor`.
std::optional<Vec3> touch_point(const ObjectSpec& object, std::optional<int> floor = std::nullopt);

/// Numeric globals a plan may reference, derived from the scene geometry,
/// robot limits and task params.
std::map<std::string, double> scene_globals(const Scene& scene);

/// Object ids and event names a plan may use as symbolic arguments.
std::set<std::string> scene_symbols(const Scene& scene);

}  // namespace quadplan
