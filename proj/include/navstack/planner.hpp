#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "navstack/geometry.hpp"
#include "navstack/messages.hpp"
#include "navstack/world.hpp"

namespace navstack {

enum class CellState : std::uint8_t { unknown, free, occupied };

// Planner-side occupancy model. Unlike GridMap it has an origin and a
// three-state cell set, since it is accumulated from scans in an arbitrary
// (episode) frame.
struct OccupancyGrid {
  int width = 0;
  int height = 0;
  double resolution = kDefaultResolution;
  Vec2 origin;  // world position of cell (0, 0)'s lower-left corner
  std::vector<CellState> cells;

  bool in_bounds(int ix, int iy) const {
    return ix >= 0 && iy >= 0 && ix < width && iy < height;
  }
  CellState at(int ix, int iy) const {
    if (!in_bounds(ix, iy)) return CellState::occupied;
    return cells[static_cast<std::size_t>(iy) * width + ix];
  }
  void set(int ix, int iy, CellState s) {
    cells[static_cast<std::size_t>(iy) * width + ix] = s;
  }
  int cell_x(double x) const {
    return static_cast<int>(std::floor((x - origin.x) / resolution));
  }
  int cell_y(double y) const {
    return static_cast<int>(std::floor((y - origin.y) / resolution));
  }
  Vec2 center(int ix, int iy) const {
    return {origin.x + (ix + 0.5) * resolution, origin.y + (iy + 0.5) * resolution};
  }
};

// Fuses depth scans (with their capture poses) into an occupancy grid:
// traversed cells become free, hit cells occupied; occupied beats free when
// scans disagree. Dropout rays (reading 0) contribute nothing.
OccupancyGrid build_occupancy(const std::vector<std::pair<DepthScan, Pose2D>>& scans,
                              double resolution = kDefaultResolution);

// Dilates occupied cells by the robot radius so planning can treat the robot
// as a point.
OccupancyGrid inflate(const OccupancyGrid& grid, double radius);

struct DistanceField {
  int width = 0;
  int height = 0;
  double resolution = kDefaultResolution;
  Vec2 origin;
  std::vector<double> values;  // arrival cost; +inf where unreachable
  int goal_ix = 0;
  int goal_iy = 0;

  double at(int ix, int iy) const;
  double value_at(const Vec2& p) const;  // bilinear where finite
  int cell_x(double x) const {
    return static_cast<int>(std::floor((x - origin.x) / resolution));
  }
  int cell_y(double y) const {
    return static_cast<int>(std::floor((y - origin.y) / resolution));
  }
  Vec2 center(int ix, int iy) const {
    return {origin.x + (ix + 0.5) * resolution, origin.y + (iy + 0.5) * resolution};
  }
};

// First-order upwind fast marching over the 4-neighbor stencil from the goal
// cell. Free cells cost 1 per meter, unknown cells 1.5; occupied cells are
// impassable. Throws if the goal lies in an occupied cell.
DistanceField fast_marching(const OccupancyGrid& grid, const Vec2& goal,
                            double unknown_penalty = 1.5);

// Steepest-descent path from `start` to the field's goal. Consecutive points
// are at most one cell diagonal apart. Throws if `start` is unreachable.
std::vector<Vec2> extract_path(const DistanceField& field, const OccupancyGrid& grid,
                               const Vec2& start);

// Greedy discretization of a waypoint path into turn/forward actions: rotate
// by the multiple of the turn increment that best aligns with the next
// waypoint (residual within half an increment), then step forward; re-aim at
// every step. Stops within `arrive_tol` of the path end.
class PathFollower {
 public:
  PathFollower() = default;
  PathFollower(std::vector<Vec2> path, double step_m = 0.25,
               double turn_increment_deg = 30.0, double arrive_tol = 0.25);

  bool done() const { return done_; }
  const std::vector<Vec2>& path() const { return path_; }

  // Next action toward the path end from the given pose, or nothing once
  // arrived.
  std::optional<DiscreteAction> next_action(const Pose2D& pose);

 private:
  std::vector<Vec2> path_;
  std::size_t next_ = 0;
  double step_m_ = 0.25;
  double turn_deg_ = 30.0;
  double arrive_tol_ = 0.25;
  bool done_ = false;
};

// Offline form of the follower: simulates ideal execution of the action
// stream from `start` and returns the full action list.
std::vector<DiscreteAction> path_to_actions(const std::vector<Vec2>& path,
                                            const Pose2D& start,
                                            double step_m = 0.25,
                                            double turn_increment_deg = 30.0);

}  // namespace navstack
