#include "navstack/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace navstack {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void mark_free(OccupancyGrid& g, int ix, int iy) {
  if (!g.in_bounds(ix, iy)) return;
  if (g.at(ix, iy) == CellState::unknown) g.set(ix, iy, CellState::free);
}

void mark_occupied(OccupancyGrid& g, int ix, int iy) {
  if (!g.in_bounds(ix, iy)) return;
  g.set(ix, iy, CellState::occupied);
}

// Walks the cells crossed by the segment [origin, origin + dir * len].
template <typename Fn>
void walk_ray(const OccupancyGrid& g, const Vec2& origin, const Vec2& dir,
              double len, Fn&& visit) {
  int ix = g.cell_x(origin.x);
  int iy = g.cell_y(origin.y);
  int step_x = dir.x > 0 ? 1 : (dir.x < 0 ? -1 : 0);
  int step_y = dir.y > 0 ? 1 : (dir.y < 0 ? -1 : 0);
  double t_max_x = kInf, t_max_y = kInf, t_delta_x = kInf, t_delta_y = kInf;
  double res = g.resolution;
  if (step_x != 0) {
    double next = g.origin.x + (step_x > 0 ? (ix + 1) * res : ix * res);
    t_max_x = (next - origin.x) / dir.x;
    t_delta_x = res / std::abs(dir.x);
  }
  if (step_y != 0) {
    double next = g.origin.y + (step_y > 0 ? (iy + 1) * res : iy * res);
    t_max_y = (next - origin.y) / dir.y;
    t_delta_y = res / std::abs(dir.y);
  }
  double t = 0.0;
  visit(ix, iy);
  while (t <= len) {
    if (t_max_x <= t_max_y) {
      t = t_max_x;
      t_max_x += t_delta_x;
      ix += step_x;
    } else {
      t = t_max_y;
      t_max_y += t_delta_y;
      iy += step_y;
    }
    if (t > len) break;
    visit(ix, iy);
  }
}

}  // namespace

OccupancyGrid build_occupancy(const std::vector<std::pair<DepthScan, Pose2D>>& scans,
                              double resolution) {
  if (!(resolution > 0.0)) throw Error("build_occupancy: resolution must be positive");
  OccupancyGrid g;
  g.resolution = resolution;
  if (scans.empty()) {
    g.width = g.height = 1;
    g.origin = {0.0, 0.0};
    g.cells.assign(1, CellState::unknown);
    return g;
  }

  double min_x = kInf, min_y = kInf, max_x = -kInf, max_y = -kInf;
  for (const auto& [scan, pose] : scans) {
    min_x = std::min(min_x, pose.x - scan.max_range);
    max_x = std::max(max_x, pose.x + scan.max_range);
    min_y = std::min(min_y, pose.y - scan.max_range);
    max_y = std::max(max_y, pose.y + scan.max_range);
  }
  double margin = 2.0 * resolution;
  g.origin = {min_x - margin, min_y - margin};
  g.width = static_cast<int>(std::ceil((max_x - min_x + 2.0 * margin) / resolution)) + 1;
  g.height = static_cast<int>(std::ceil((max_y - min_y + 2.0 * margin) / resolution)) + 1;
  g.cells.assign(static_cast<std::size_t>(g.width) * g.height, CellState::unknown);

  struct Hit {
    int ix, iy;
  };
  std::vector<Hit> hits;
  for (const auto& [scan, pose] : scans) {
    int n = static_cast<int>(scan.ranges.size());
    double spacing = scan.fov_deg / n;
    for (int i = 0; i < n; ++i) {
      double r = scan.ranges[i];
      if (r <= 0.0) continue;  // dropout carries no information
      double angle = pose.heading_deg - scan.fov_deg / 2.0 + i * spacing;
      Vec2 dir = heading_dir(angle);
      bool obstructed = r < scan.max_range - 1e-9;
      // Free space ends one cell short of the hit so the hit cell itself is
      // not whitened by its own ray.
      double free_len = std::max(0.0, r - g.resolution);
      walk_ray(g, pose.position(), dir, free_len,
               [&](int ix, int iy) { mark_free(g, ix, iy); });
      if (obstructed) {
        Vec2 hit = pose.position() + dir * r;
        hits.push_back({g.cell_x(hit.x), g.cell_y(hit.y)});
      }
    }
  }
  for (const Hit& h : hits) mark_occupied(g, h.ix, h.iy);
  return g;
}

OccupancyGrid inflate(const OccupancyGrid& grid, double radius) {
  OccupancyGrid out = grid;
  if (!(radius > 0.0)) return out;
  int r_cells = static_cast<int>(std::ceil(radius / grid.resolution));
  std::vector<std::pair<int, int>> offsets;
  for (int dy = -r_cells; dy <= r_cells; ++dy) {
    for (int dx = -r_cells; dx <= r_cells; ++dx) {
      // A cell is blocked when its center lies within `radius` of any point
      // of an occupied cell (closest-point distance between cell squares).
      double ddx = std::max(0.0, (std::abs(dx) - 0.5)) * grid.resolution;
      double ddy = std::max(0.0, (std::abs(dy) - 0.5)) * grid.resolution;
      if (std::hypot(ddx, ddy) < radius) offsets.emplace_back(dx, dy);
    }
  }
  for (int iy = 0; iy < grid.height; ++iy) {
    for (int ix = 0; ix < grid.width; ++ix) {
      if (grid.at(ix, iy) != CellState::occupied) continue;
      for (auto [dx, dy] : offsets) {
        int nx = ix + dx, ny = iy + dy;
        if (out.in_bounds(nx, ny)) out.set(nx, ny, CellState::occupied);
      }
    }
  }
  return out;
}

double DistanceField::at(int ix, int iy) const {
  if (ix < 0 || iy < 0 || ix >= width || iy >= height) return kInf;
  return values[static_cast<std::size_t>(iy) * width + ix];
}

double DistanceField::value_at(const Vec2& p) const {
  double fx = (p.x - origin.x) / resolution - 0.5;
  double fy = (p.y - origin.y) / resolution - 0.5;
  int ix = static_cast<int>(std::floor(fx));
  int iy = static_cast<int>(std::floor(fy));
  double ax = fx - ix, ay = fy - iy;
  double v00 = at(ix, iy), v10 = at(ix + 1, iy);
  double v01 = at(ix, iy + 1), v11 = at(ix + 1, iy + 1);
  if (!std::isfinite(v00) || !std::isfinite(v10) || !std::isfinite(v01) ||
      !std::isfinite(v11)) {
    // Bilinear blending is meaningless across unreachable cells; fall back to
    // the containing cell's value.
    return at(cell_x(p.x), cell_y(p.y));
  }
  return (1 - ax) * (1 - ay) * v00 + ax * (1 - ay) * v10 + (1 - ax) * ay * v01 +
         ax * ay * v11;
}

DistanceField fast_marching(const OccupancyGrid& grid, const Vec2& goal,
                            double unknown_penalty) {
  DistanceField f;
  f.width = grid.width;
  f.height = grid.height;
  f.resolution = grid.resolution;
  f.origin = grid.origin;
  f.values.assign(static_cast<std::size_t>(grid.width) * grid.height, kInf);
  f.goal_ix = grid.cell_x(goal.x);
  f.goal_iy = grid.cell_y(goal.y);
  if (!grid.in_bounds(f.goal_ix, f.goal_iy)) {
    throw Error("fast_marching: goal outside the grid");
  }
  if (grid.at(f.goal_ix, f.goal_iy) == CellState::occupied) {
    throw Error("fast_marching: goal inside an occupied cell");
  }

  auto idx = [&](int ix, int iy) {
    return static_cast<std::size_t>(iy) * grid.width + ix;
  };
  auto cost = [&](int ix, int iy) {
    return grid.at(ix, iy) == CellState::unknown ? unknown_penalty : 1.0;
  };

  std::vector<std::uint8_t> accepted(f.values.size(), 0);
  const double h = grid.resolution;

  // Eikonal update |grad T| = cost from the accepted 4-neighborhood.
  auto solve = [&](int ix, int iy) {
    double a = std::min(f.at(ix - 1, iy), f.at(ix + 1, iy));
    double b = std::min(f.at(ix, iy - 1), f.at(ix, iy + 1));
    double fc = cost(ix, iy) * h;
    if (!std::isfinite(a) && !std::isfinite(b)) return kInf;
    if (!std::isfinite(a)) return b + fc;
    if (!std::isfinite(b)) return a + fc;
    if (std::abs(a - b) >= fc) return std::min(a, b) + fc;
    return 0.5 * (a + b + std::sqrt(2.0 * fc * fc - (a - b) * (a - b)));
  };

  using HeapItem = std::pair<double, std::size_t>;
  std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>> heap;
  f.values[idx(f.goal_ix, f.goal_iy)] = 0.0;
  heap.push({0.0, idx(f.goal_ix, f.goal_iy)});

  const int dx4[4] = {1, -1, 0, 0};
  const int dy4[4] = {0, 0, 1, -1};
  while (!heap.empty()) {
    auto [val, i] = heap.top();
    heap.pop();
    if (accepted[i]) continue;
    if (val > f.values[i]) continue;  // stale heap entry
    accepted[i] = 1;
    int ix = static_cast<int>(i % grid.width);
    int iy = static_cast<int>(i / grid.width);
    for (int k = 0; k < 4; ++k) {
      int nx = ix + dx4[k], ny = iy + dy4[k];
      if (!grid.in_bounds(nx, ny)) continue;
      if (grid.at(nx, ny) == CellState::occupied) continue;
      std::size_t ni = idx(nx, ny);
      if (accepted[ni]) continue;
      double cand = solve(nx, ny);
      if (cand < f.values[ni]) {
        f.values[ni] = cand;
        heap.push({cand, ni});
      }
    }
  }
  return f;
}

std::vector<Vec2> extract_path(const DistanceField& field, const OccupancyGrid& grid,
                               const Vec2& start) {
  int six = field.cell_x(start.x);
  int siy = field.cell_y(start.y);
  if (!std::isfinite(field.at(six, siy))) {
    throw Error("extract_path: start is unreachable from the goal");
  }

  std::vector<Vec2> path;
  Vec2 p = start;
  path.push_back(p);
  const double h = field.resolution;
  const Vec2 goal_center = field.center(field.goal_ix, field.goal_iy);
  const std::size_t max_iter =
      static_cast<std::size_t>(field.width) * field.height * 4 + 64;

  for (std::size_t it = 0; it < max_iter; ++it) {
    int ix = field.cell_x(p.x);
    int iy = field.cell_y(p.y);
    if ((ix == field.goal_ix && iy == field.goal_iy) ||
        distance(p, goal_center) <= h) {
      if (it == 0) return path;  // start already at the goal cell
      if (distance(path.back(), goal_center) > 1e-9) path.push_back(goal_center);
      return path;
    }

    double here = field.value_at(p);
    // Central-difference descent direction on the interpolated field.
    double gx = field.value_at({p.x + 0.5 * h, p.y}) -
                field.value_at({p.x - 0.5 * h, p.y});
    double gy = field.value_at({p.x, p.y + 0.5 * h}) -
                field.value_at({p.x, p.y - 0.5 * h});
    Vec2 cand = p;
    bool moved = false;
    double gn = std::hypot(gx, gy);
    if (std::isfinite(gn) && gn > 1e-12) {
      Vec2 q = {p.x - 0.5 * h * gx / gn, p.y - 0.5 * h * gy / gn};
      int qx = field.cell_x(q.x), qy = field.cell_y(q.y);
      if (grid.at(qx, qy) != CellState::occupied &&
          field.value_at(q) < here - 1e-12) {
        cand = q;
        moved = true;
      }
    }
    if (!moved) {
      // Gradient stalled (coarse field or infinite neighbors): hop to the
      // best 8-neighbor cell center, forbidding corner cutting.
      double best = here;
      int bx = ix, by = iy;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          int nx = ix + dx, ny = iy + dy;
          if (grid.at(nx, ny) == CellState::occupied) continue;
          if (dx != 0 && dy != 0 &&
              (grid.at(ix + dx, iy) == CellState::occupied ||
               grid.at(ix, iy + dy) == CellState::occupied)) {
            continue;
          }
          double v = field.at(nx, ny);
          if (v < best) {
            best = v;
            bx = nx;
            by = ny;
          }
        }
      }
      if (bx == ix && by == iy) {
        throw Error("extract_path: descent stalled before reaching the goal");
      }
      cand = field.center(bx, by);
    }
    p = cand;
    path.push_back(p);
  }
  throw Error("extract_path: iteration budget exhausted");
}

PathFollower::PathFollower(std::vector<Vec2> path, double step_m,
                           double turn_increment_deg, double arrive_tol)
    : path_(std::move(path)),
      step_m_(step_m),
      turn_deg_(turn_increment_deg),
      arrive_tol_(arrive_tol) {
  if (path_.empty()) done_ = true;
}

std::optional<DiscreteAction> PathFollower::next_action(const Pose2D& pose) {
  if (done_) return std::nullopt;
  const Vec2 end = path_.back();
  if (distance(pose.position(), end) <= arrive_tol_) {
    done_ = true;
    return std::nullopt;
  }
  // Consume waypoints already reached; aim at the first one still ahead.
  while (next_ + 1 < path_.size() &&
         distance(pose.position(), path_[next_]) <= step_m_) {
    ++next_;
  }
  Vec2 target = path_[next_];
  if (distance(pose.position(), target) < 1e-9) {
    if (next_ + 1 < path_.size()) {
      ++next_;
      target = path_[next_];
    } else {
      done_ = true;
      return std::nullopt;
    }
  }
  double aim = rad_to_deg(std::atan2(target.y - pose.y, target.x - pose.x));
  double err = signed_deg(normalize_deg(aim - pose.heading_deg));
  if (std::abs(err) > turn_deg_ / 2.0) {
    return err > 0.0 ? make_turn_left(turn_deg_) : make_turn_right(turn_deg_);
  }
  return make_move_forward(step_m_);
}

std::vector<DiscreteAction> path_to_actions(const std::vector<Vec2>& path,
                                            const Pose2D& start, double step_m,
                                            double turn_increment_deg) {
  PathFollower follower(path, step_m, turn_increment_deg, step_m);
  Pose2D pose = start;
  std::vector<DiscreteAction> actions;
  const std::size_t guard = path.size() * 64 + 4096;
  while (actions.size() < guard) {
    auto a = follower.next_action(pose);
    if (!a) break;
    actions.push_back(*a);
    switch (a->kind) {
      case ActionKind::move_forward:
        pose.x += a->magnitude * std::cos(deg_to_rad(pose.heading_deg));
        pose.y += a->magnitude * std::sin(deg_to_rad(pose.heading_deg));
        break;
      case ActionKind::turn_left:
        pose.heading_deg = normalize_deg(pose.heading_deg + a->magnitude);
        break;
      case ActionKind::turn_right:
        pose.heading_deg = normalize_deg(pose.heading_deg - a->magnitude);
        break;
      default:
        break;
    }
  }
  return actions;
}

}  // namespace navstack
