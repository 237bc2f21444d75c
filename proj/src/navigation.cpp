// SPDX-License-Identifier: Apache-2.0
#include "quadplan/navigation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <queue>

namespace quadplan {

namespace {

constexpr double kLevelTolerance = 0.01;
constexpr double kSampleStep = 0.02;
constexpr double kUnknown = std::numeric_limits<double>::quiet_NaN();
constexpr double kDrop = -std::numeric_limits<double>::infinity();
/// How much deeper than its start margin a robot leaving an inflated zone may go.
constexpr double kEscapeSlack = 0.05;

}  // namespace

Navigator::Navigator(const Scene& scene, NavRequest request) : scene_(scene), req_(std::move(request)) {
  const double body_top = req_.level + scene.limits.quad_body.z;
  for (const auto& [id, obj] : scene.objects) {
    if (!obj.solid()) continue;
    if (obj.top_z() <= req_.level + kLevelTolerance + 1e-9) continue;
    if (obj.pose.position.z >= body_top) continue;
    double clearance = req_.inflation;
    if (req_.avoid && *req_.avoid == id) clearance += req_.avoid_margin;
    obstacles_.push_back({obj.bounds(), clearance});
  }
  const Bounds& b = scene.bounds;
  nx_ = static_cast<int>(std::ceil((b.max_x - b.min_x) / req_.cell));
  ny_ = static_cast<int>(std::ceil((b.max_y - b.min_y) / req_.cell));
  margins_.assign(static_cast<std::size_t>(nx_) * ny_, kUnknown);
}

double Navigator::margin(double x, double y) const {
  if (!scene_.bounds.contains(x, y)) return kDrop;
  if (support_height_at(scene_, x, y) < req_.level - kLevelTolerance - 1e-9) return kDrop;
  double m = std::numeric_limits<double>::infinity();
  for (const auto& o : obstacles_) {
    const double d = distance_to_footprint(o.footprint, x, y);
    m = std::min(m, d <= 0.0 ? -o.clearance - 1.0 : d - o.clearance);
  }
  return m;
}

bool Navigator::point_free(double x, double y) const { return margin(x, y) >= -1e-9; }

bool Navigator::step_allowed(double from, double to) const {
  if (to == kDrop) return false;
  if (to >= -1e-9) return true;
  // Inside an inflated zone: stay inside it, never much deeper than the start.
  return from < -1e-9 && to >= escape_floor_ - 1e-12;
}

bool Navigator::segment_clear(Vec3 a, Vec3 b, double start_margin) const {
  const double len = distance_xy(a, b);
  const int n = std::max(1, static_cast<int>(std::ceil(len / kSampleStep)));
  double prev = start_margin;
  for (int k = 1; k <= n; ++k) {
    const double t = static_cast<double>(k) / n;
    const double m = margin(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t);
    if (!step_allowed(prev, m)) return false;
    prev = m;
  }
  return true;
}

double Navigator::cell_margin(int i, int j) {
  const auto idx = static_cast<std::size_t>(j) * nx_ + i;
  if (std::isnan(margins_[idx])) {
    const Vec3 c = cell_center(i, j);
    margins_[idx] = margin(c.x, c.y);
  }
  return margins_[idx];
}

Vec3 Navigator::cell_center(int i, int j) const {
  return {scene_.bounds.min_x + (i + 0.5) * req_.cell, scene_.bounds.min_y + (j + 0.5) * req_.cell, req_.level};
}

std::optional<std::vector<Vec3>> Navigator::plan() {
  const Vec3 start{req_.start.x, req_.start.y, req_.level};
  const Vec3 goal{req_.goal.x, req_.goal.y, req_.level};
  if (!point_free(goal.x, goal.y)) return std::nullopt;
  const double start_margin = margin(start.x, start.y);
  if (start_margin == kDrop) return std::nullopt;
  escape_floor_ = std::min(0.0, start_margin) - kEscapeSlack;
  if (distance_xy(start, goal) < 1e-12) return std::vector<Vec3>{start, goal};
  if (segment_clear(start, goal, start_margin)) return std::vector<Vec3>{start, goal};

  auto cell_of = [&](double v, double lo, int n) {
    return std::clamp(static_cast<int>(std::floor((v - lo) / req_.cell)), 0, n - 1);
  };
  const int si = cell_of(start.x, scene_.bounds.min_x, nx_);
  const int sj = cell_of(start.y, scene_.bounds.min_y, ny_);
  const int gi = cell_of(goal.x, scene_.bounds.min_x, nx_);
  const int gj = cell_of(goal.y, scene_.bounds.min_y, ny_);

  const std::size_t total = margins_.size();
  std::vector<double> g(total, std::numeric_limits<double>::infinity());
  std::vector<int> parent(total, -2);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  auto heuristic = [&](int i, int j) { return distance_xy(cell_center(i, j), goal); };
  auto index = [&](int i, int j) { return j * nx_ + i; };

  // Seed with the cells around the exact start point.
  for (int dj = -1; dj <= 1; ++dj) {
    for (int di = -1; di <= 1; ++di) {
      const int i = si + di;
      const int j = sj + dj;
      if (i < 0 || j < 0 || i >= nx_ || j >= ny_) continue;
      const Vec3 c = cell_center(i, j);
      if (!segment_clear(start, c, start_margin)) continue;
      const int id = index(i, j);
      g[id] = distance_xy(start, c);
      parent[id] = -1;
      open.push({g[id] + heuristic(i, j), id});
    }
  }

  int reached = -1;
  while (!open.empty()) {
    const auto [f, id] = open.top();
    open.pop();
    const int i = id % nx_;
    const int j = id / nx_;
    if (f > g[id] + heuristic(i, j) + 1e-9) continue;
    const Vec3 c = cell_center(i, j);
    if (std::abs(i - gi) <= 1 && std::abs(j - gj) <= 1 && segment_clear(c, goal, cell_margin(i, j))) {
      reached = id;
      break;
    }
    const double here = cell_margin(i, j);
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        const int ni = i + di;
        const int nj = j + dj;
        if (ni < 0 || nj < 0 || ni >= nx_ || nj >= ny_) continue;
        if (!step_allowed(here, cell_margin(ni, nj))) continue;
        const int nid = index(ni, nj);
        const double cost = g[id] + ((di != 0 && dj != 0) ? std::numbers::sqrt2 : 1.0) * req_.cell;
        if (cost + 1e-12 < g[nid]) {
          g[nid] = cost;
          parent[nid] = id;
          open.push({cost + heuristic(ni, nj), nid});
        }
      }
    }
  }
  if (reached < 0) return std::nullopt;

  std::vector<Vec3> raw{goal};
  for (int id = reached; id >= 0; id = parent[id]) raw.push_back(cell_center(id % nx_, id / nx_));
  raw.push_back(start);
  std::reverse(raw.begin(), raw.end());

  // Shortcut waypoints that can see further along the path.
  std::vector<Vec3> path{start};
  std::size_t anchor = 0;
  double anchor_margin = start_margin;
  while (anchor + 1 < raw.size()) {
    std::size_t best = anchor + 1;
    for (std::size_t k = anchor + 2; k < raw.size(); ++k) {
      if (!segment_clear(raw[anchor], raw[k], anchor_margin)) break;
      best = k;
    }
    path.push_back(raw[best]);
    anchor = best;
    anchor_margin = margin(raw[anchor].x, raw[anchor].y);
  }
  return path;
}

double path_length(const std::vector<Vec3>& path) {
  double total = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) total += distance_xy(path[k - 1], path[k]);
  return total;
}

}  // namespace quadplan
