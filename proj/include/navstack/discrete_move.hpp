#pragma once

#include <string>
#include <vector>

#include "navstack/bus.hpp"
#include "navstack/config.hpp"
#include "navstack/geometry.hpp"
#include "navstack/messages.hpp"
#include "navstack/scheduler.hpp"

namespace navstack {

// Turn error: (target - current) mod 360, in [0, 360).
inline double turn_error_deg(double target_deg, double current_deg) {
  double r = std::fmod(target_deg - current_deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r = 0.0;
  return r;
}

// Straight-line error: commanded distance minus measured displacement from
// the action's start position.
inline double straight_error_m(double commanded_m, double x, double y,
                               double x_init, double y_init) {
  return commanded_m - std::sqrt((x - x_init) * (x - x_init) +
                                 (y - y_init) * (y - y_init));
}

enum class ProfilePhase { accel, cruise, decel };

// Speed along the trapezoidal profile. `covered` is progress within the
// current phase: distance covered so far for accel, distance remaining for
// decel. The result is capped at the cruise speed.
inline double profile_speed(double v_init, double accel, double covered,
                            ProfilePhase phase, double cruise) {
  switch (phase) {
    case ProfilePhase::accel: {
      double v = std::sqrt(std::max(0.0, v_init * v_init + 2.0 * accel * covered));
      return std::min(v, cruise);
    }
    case ProfilePhase::cruise:
      return cruise;
    case ProfilePhase::decel: {
      double v = std::sqrt(std::max(0.0, 2.0 * accel * covered));
      return std::min(v, cruise);
    }
  }
  return 0.0;
}

struct MotionConfig {
  double linear_velocity = 0.3;      // m/s cruise speed for moves
  double angular_velocity = 0.5;     // rad/s cruise speed for turns
  double accel_decel_distance = -1.0;  // m; non-positive selects distance/3
  double timeout_s = 30.0;           // simulation seconds per action
  double tolerance_turn_deg = 0.1;
  double tolerance_straight_m = 0.005;
  double controller_rate_hz = 50.0;
  double creep_linear = 0.02;   // m/s floor so sqrt profiles leave rest
  double creep_angular = 0.05;  // rad/s floor
};

MotionConfig motion_config_from(const ConfigFile& cfg);
MotionConfig load_motion_config(const std::string& path);

// Closed-loop executor for the discrete action set. Subscribes to /odom,
// publishes /cmd_vel, serves /discrete_move. Runs its control loop on the
// service worker thread, pumping the shared scheduler between ticks.
class DiscreteMoveNode {
 public:
  static constexpr const char* kServiceName = "/discrete_move";

  struct TraceTick {
    double t = 0.0;
    double covered = 0.0;
    double remaining = 0.0;
    double command = 0.0;  // signed commanded speed (m/s or rad/s)
    ProfilePhase phase = ProfilePhase::accel;
  };

  DiscreteMoveNode(Bus& bus, Scheduler& sched, MotionConfig cfg,
                   const std::string& node_name = "discrete_move");

  const MotionConfig& config() const { return cfg_; }
  void enable_trace(bool on) { trace_enabled_ = on; }
  const std::vector<TraceTick>& last_trace() const { return trace_; }

 private:
  MoveResult execute(const DiscreteAction& action);
  MoveResult run_turn(const DiscreteAction& action, const OdomSample& start, double t0);
  MoveResult run_move(const DiscreteAction& action, const OdomSample& start, double t0);

  // Drains the odometry queue; keeps the newest sample and latches contact.
  void poll_odom();
  bool await_start_sample(double t0, OdomSample& out);
  void command(double v, double w);

  Bus& bus_;
  Scheduler& sched_;
  MotionConfig cfg_;
  Publisher cmd_pub_;
  SubscriptionPtr odom_sub_;
  bool have_odom_ = false;
  OdomSample latest_odom_;
  bool collision_seen_ = false;
  bool trace_enabled_ = false;
  std::vector<TraceTick> trace_;
};

}  // namespace navstack
