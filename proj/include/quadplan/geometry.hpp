// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace quadplan {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a * s; }
  friend constexpr Vec3 operator/(Vec3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

  [[nodiscard]] double norm() const { return std::sqrt(x * x + y * y + z * z); }
  [[nodiscard]] double norm_xy() const { return std::hypot(x, y); }
  [[nodiscard]] bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline double distance(Vec3 a, Vec3 b) { return (a - b).norm(); }
inline double distance_xy(Vec3 a, Vec3 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Wraps an angle into [-pi, pi).
inline double normalize_yaw(double yaw) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(yaw + std::numbers::pi, two_pi);
  if (wrapped < 0.0) wrapped += two_pi;
  wrapped -= std::numbers::pi;
  // fmod can land exactly on +pi after the shift for inputs just below -pi.
  if (wrapped >= std::numbers::pi) wrapped -= two_pi;
  return wrapped;
}

struct Pose {
  Vec3 position;
  double yaw = 0.0;

  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Axis-aligned box given by its min and max corners.
struct Aabb {
  Vec3 min;
  Vec3 max;

  [[nodiscard]] bool contains_xy(double x, double y) const {
    return x >= min.x && x <= max.x && y >= min.y && y <= max.y;
  }
  [[nodiscard]] bool strictly_contains(Vec3 p, double eps = 1e-9) const {
    return p.x > min.x + eps && p.x < max.x - eps && p.y > min.y + eps && p.y < max.y - eps &&
           p.z > min.z + eps && p.z < max.z - eps;
  }
  [[nodiscard]] Vec3 center() const { return (min + max) * 0.5; }
  /// Closest point of the box to p.
  [[nodiscard]] Vec3 clamp(Vec3 p) const {
    return {std::clamp(p.x, min.x, max.x), std::clamp(p.y, min.y, max.y),
            std::clamp(p.z, min.z, max.z)};
  }
};

/// True when the closed boxes share a region of positive volume.
inline bool overlaps_with_volume(const Aabb& a, const Aabb& b, double eps = 1e-9) {
  return a.min.x < b.max.x - eps && b.min.x < a.max.x - eps && a.min.y < b.max.y - eps &&
         b.min.y < a.max.y - eps && a.min.z < b.max.z - eps && b.min.z < a.max.z - eps;
}

/// Distance in the xy-plane from a point to a rectangle footprint (0 inside).
inline double distance_to_footprint(const Aabb& box, double x, double y) {
  const double dx = std::max({box.min.x - x, 0.0, x - box.max.x});
  const double dy = std::max({box.min.y - y, 0.0, y - box.max.y});
  return std::hypot(dx, dy);
}

}  // namespace quadplan
