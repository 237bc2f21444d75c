// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "quadplan/world.hpp"

namespace quadplan {

struct NavRequest {
  Vec3 start;
  Vec3 goal;
  /// Support level the robot walks on.
  double level = 0.0;
  /// Clearance kept from obstacle footprints.
  double inflation = 0.0;
  std::optional<std::string> avoid;
  double avoid_margin = 0.2;
  double cell = 0.05;
};

/// Occupancy-grid planner over one support level. Objects that rise above the
/// level are obstacles; points whose support is lower than the level are
/// drop-offs. The start may sit inside the inflated zone (after a push, say);
/// the robot may move within it, at most a few centimeters deeper than where it
/// started, and once out it never re-enters one.
class Navigator {
 public:
  Navigator(const Scene& scene, NavRequest request);

  /// Waypoints from start to goal inclusive, or nullopt when unreachable.
  std::optional<std::vector<Vec3>> plan();

  /// Goal-point check, exact (not cell-based).
  [[nodiscard]] bool point_free(double x, double y) const;

 private:
  struct Obstacle {
    Aabb footprint;
    double clearance;
  };

  /// Distance beyond the required clearance (negative inside an inflated
  /// zone, -inf over a drop-off or out of bounds).
  [[nodiscard]] double margin(double x, double y) const;
  [[nodiscard]] bool step_allowed(double from, double to) const;
  [[nodiscard]] bool segment_clear(Vec3 a, Vec3 b, double start_margin) const;
  double cell_margin(int i, int j);
  [[nodiscard]] Vec3 cell_center(int i, int j) const;

  const Scene& scene_;
  NavRequest req_;
  std::vector<Obstacle> obstacles_;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> margins_;
  double escape_floor_ = 0.0;
};

double path_length(const std::vector<Vec3>& path);

}  // namespace quadplan
