#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "navstack/geometry.hpp"
#include "navstack/messages.hpp"
#include "navstack/rng.hpp"

namespace navstack {

inline constexpr double kDefaultResolution = 0.05;  // meters per cell
inline constexpr double kDefaultRobotRadius = 0.18;

// Static occupancy bitmap. Cell (ix, iy) covers the half-open square
// [ix*res, (ix+1)*res) x [iy*res, (iy+1)*res); the world origin is (0, 0).
struct GridMap {
  int width = 0;
  int height = 0;
  double resolution = kDefaultResolution;
  std::vector<std::uint8_t> occ;

  bool in_bounds(int ix, int iy) const {
    return ix >= 0 && iy >= 0 && ix < width && iy < height;
  }
  bool occupied(int ix, int iy) const {
    if (!in_bounds(ix, iy)) return true;
    return occ[static_cast<std::size_t>(iy) * width + ix] != 0;
  }
  void set(int ix, int iy, bool value) {
    occ[static_cast<std::size_t>(iy) * width + ix] = value ? 1 : 0;
  }
  int cell_x(double x) const { return static_cast<int>(std::floor(x / resolution)); }
  int cell_y(double y) const { return static_cast<int>(std::floor(y / resolution)); }
  double width_m() const { return width * resolution; }
  double height_m() const { return height * resolution; }
};

struct ObjectInstance {
  Category category = Category::chair;
  Vec2 centroid;
  double radius = 0.0;  // disc footprint; collides and occludes
};

struct WorldMap {
  GridMap grid;
  std::vector<ObjectInstance> objects;
  std::vector<Pose2D> starts;

  bool has_category(Category c) const {
    for (const auto& o : objects) {
      if (o.category == c) return true;
    }
    return false;
  }
};

// Loads and validates a world file (JSON: resolution, grid row strings of
// '.'/'#' with row 0 at the top, objects, starts). Throws Error naming the
// offending entity on any invariant violation.
WorldMap load_world(const std::string& path, double robot_radius = kDefaultRobotRadius);
WorldMap parse_world(const std::string& json_text, double robot_radius = kDefaultRobotRadius);
std::string world_fingerprint(const WorldMap& world);

struct RobotState {
  Pose2D pose;
  double radius = kDefaultRobotRadius;
};

struct NoiseModel {
  double actuation_scale_sigma = 0.0;  // multiplicative on commanded v and w
  double odom_xy_sigma = 0.0;          // meters, per reported sample axis
  double odom_heading_sigma_deg = 0.0; // degrees, per reported sample
  double depth_gaussian_sigma = 0.0;   // meters, per ray
  double depth_impulse_prob = 0.0;     // per ray: replace with uniform range
  double depth_dropout_prob = 0.0;     // per ray: replace with 0
  std::uint64_t rng_seed = 0;
};

struct SensorGeometry {
  double fov_deg = 90.0;
  int n_rays = 180;
  double max_range = 5.0;
};

// True iff a disc of the given radius centered at `pos` overlaps an occupied
// cell or an object footprint. A zero radius degenerates to point containment
// in the (half-open) cell holding the point.
bool check_collision(const WorldMap& world, const Vec2& pos, double radius);

struct StepResult {
  RobotState state;
  bool collision = false;      // contact reached during this step
  double path_length = 0.0;    // arc length actually traveled
};

// Advances the unicycle plant by dt under the commanded twist with exact arc
// integration. Multiplicative actuation noise is drawn from `rng` when the
// model's sigma is nonzero. Motion stops at first contact.
StepResult step(const RobotState& state, const Twist& cmd, double dt,
                const WorldMap& world, const NoiseModel& noise, Rng& rng);

// Casts the sensor fan from `pose` and returns per-ray ranges clamped to
// (0, max_range]. Depth noise order: Gaussian jitter, impulse, dropout.
// Throws if the pose itself is inside an occupied cell or object footprint.
DepthScan render_depth(const WorldMap& world, const Pose2D& pose,
                       const SensorGeometry& geom, const NoiseModel& noise,
                       Rng& rng, double stamp = 0.0);

// Noiseless semantic fan: per-ray label of the first surface hit, the surface
// distance, the hit instance's centroid distance, and an unoccluded flag.
SemanticScan render_semantic(const WorldMap& world, const Pose2D& pose,
                             const SensorGeometry& geom, double stamp = 0.0);

// Minimum Euclidean distance from `pos` to any instance centroid of the
// category. Throws if the world holds no such instance.
double distance_to_object(const WorldMap& world, const Vec2& pos, Category category);

// Stateful plant wrapper used by the node layer: owns the robot state, the
// noise RNG, a collision latch, and the odometer.
class SimWorld {
 public:
  SimWorld(const WorldMap& world, RobotState initial, NoiseModel noise)
      : world_(world), state_(initial), noise_(noise), rng_(noise.rng_seed) {}

  const WorldMap& map() const { return world_; }
  const RobotState& robot() const { return state_; }
  Pose2D pose() const { return state_.pose; }
  void set_pose(const Pose2D& p) { state_.pose = p; }
  NoiseModel& noise() { return noise_; }
  Rng& rng() { return rng_; }
  double traveled_m() const { return traveled_; }

  void apply(const Twist& cmd, double dt) {
    StepResult r = step(state_, cmd, dt, world_, noise_, rng_);
    state_ = r.state;
    traveled_ += r.path_length;
    if (r.collision) collision_latch_ = true;
  }

  // Reads and clears the contact latch (one odometry reporting interval).
  bool take_collision_latch() {
    bool c = collision_latch_;
    collision_latch_ = false;
    return c;
  }

  DepthScan depth(const SensorGeometry& geom, double stamp) {
    return render_depth(world_, state_.pose, geom, noise_, rng_, stamp);
  }
  SemanticScan semantic(const SensorGeometry& geom, double stamp) {
    return render_semantic(world_, state_.pose, geom, stamp);
  }

 private:
  const WorldMap& world_;
  RobotState state_;
  NoiseModel noise_;
  Rng rng_;
  bool collision_latch_ = false;
  double traveled_ = 0.0;
};

}  // namespace navstack
