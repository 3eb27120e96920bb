#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "navstack/geometry.hpp"

namespace navstack {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Closed object category set shared by worlds, policies, and evaluation.
enum class Category : std::uint8_t {
  chair,
  sofa,
  table,
  bed,
  toilet,
  monitor,
  plant,
};

inline constexpr std::array<Category, 7> kAllCategories = {
    Category::chair, Category::sofa,    Category::table, Category::bed,
    Category::toilet, Category::monitor, Category::plant,
};

inline const char* to_string(Category c) {
  switch (c) {
    case Category::chair: return "chair";
    case Category::sofa: return "sofa";
    case Category::table: return "table";
    case Category::bed: return "bed";
    case Category::toilet: return "toilet";
    case Category::monitor: return "monitor";
    case Category::plant: return "plant";
  }
  return "?";
}

inline Category category_from_string(const std::string& s) {
  for (Category c : kAllCategories) {
    if (s == to_string(c)) return c;
  }
  throw Error("unknown object category: '" + s + "'");
}

// Per-ray label in a semantic scan: a category, bare structure, or nothing.
enum class RayLabel : std::uint8_t {
  none,
  wall,
  chair,
  sofa,
  table,
  bed,
  toilet,
  monitor,
  plant,
};

inline RayLabel to_ray_label(Category c) {
  return static_cast<RayLabel>(static_cast<std::uint8_t>(c) + 2);
}

inline bool label_matches(RayLabel l, Category c) { return l == to_ray_label(c); }

inline const char* to_string(RayLabel l) {
  switch (l) {
    case RayLabel::none: return "none";
    case RayLabel::wall: return "wall";
    default:
      return to_string(static_cast<Category>(static_cast<std::uint8_t>(l) - 2));
  }
}

struct Twist {
  double v = 0.0;  // m/s, forward positive
  double w = 0.0;  // rad/s, counterclockwise positive
};

struct OdomSample {
  double x = 0.0;  // meters, relative to the last odometry reset
  double y = 0.0;
  double heading_deg = 0.0;  // [0, 360), relative to the last reset
  double stamp = 0.0;        // simulation seconds
  std::uint64_t seq = 0;
  bool collision = false;  // contact occurred since the previous sample
};

struct DepthScan {
  std::vector<double> ranges;  // meters; 0 encodes dropout
  double fov_deg = 90.0;
  double max_range = 5.0;
  double stamp = 0.0;
  Pose2D pose_hint;  // ground-truth capture pose, for plots and debugging
};

struct SemanticScan {
  std::vector<RayLabel> labels;
  std::vector<double> hit_ranges;     // distance to the hit surface
  std::vector<double> object_ranges;  // distance to the hit instance centroid
  std::vector<std::uint8_t> visible;  // 1 when the ray hit an object unoccluded
  double fov_deg = 90.0;
  double max_range = 5.0;
  double stamp = 0.0;
  Pose2D pose_hint;
};

struct CameraFault {
  std::string message;
  double stamp = 0.0;
};

using Payload = std::variant<Twist, OdomSample, DepthScan, SemanticScan, CameraFault>;

// Discrete action vocabulary executed by the motion server.
enum class ActionKind : std::uint8_t {
  move_forward,
  move_backward,
  turn_left,
  turn_right,
  stop,
};

inline const char* to_string(ActionKind k) {
  switch (k) {
    case ActionKind::move_forward: return "move_forward";
    case ActionKind::move_backward: return "move_backward";
    case ActionKind::turn_left: return "turn_left";
    case ActionKind::turn_right: return "turn_right";
    case ActionKind::stop: return "stop";
  }
  return "?";
}

struct DiscreteAction {
  ActionKind kind = ActionKind::stop;
  // Meters for moves, degrees for turns; ignored for stop.
  double magnitude = 0.0;
};

inline DiscreteAction make_move_forward(double m) { return {ActionKind::move_forward, m}; }
inline DiscreteAction make_move_backward(double m) { return {ActionKind::move_backward, m}; }
inline DiscreteAction make_turn_left(double deg) { return {ActionKind::turn_left, deg}; }
inline DiscreteAction make_turn_right(double deg) { return {ActionKind::turn_right, deg}; }
inline DiscreteAction make_stop() { return {ActionKind::stop, 0.0}; }

struct MoveResult {
  bool success = false;
  double final_turn_error_deg = 0.0;    // target vs. current heading, [0, 360)
  double final_straight_error_m = 0.0;  // commanded minus measured displacement
  double elapsed_s = 0.0;               // simulation time spent on the action
  bool collision = false;
  std::string error;  // empty on success

  // Diagnostics sufficient to recompute both error equations.
  OdomSample start_odom;
  OdomSample final_odom;
  double target_heading_deg = 0.0;   // turns only
  double commanded_distance_m = 0.0; // moves only
};

struct ResetOdometry {};

struct Ack {
  bool ok = true;
};

using ServiceRequest = std::variant<DiscreteAction, ResetOdometry>;
using ServiceResponse = std::variant<MoveResult, Ack>;

}  // namespace navstack
