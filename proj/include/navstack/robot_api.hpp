#pragma once

#include <limits>
#include <string>

#include "navstack/bus.hpp"
#include "navstack/config.hpp"
#include "navstack/scheduler.hpp"
#include "navstack/world.hpp"

namespace navstack {

struct RobotConfig {
  double odom_rate_hz = 30.0;
  double watchdog_s = 0.5;       // zero the command after this much silence
  double max_linear = 0.3;       // m/s, clamp on receipt
  double max_angular = 0.5;      // rad/s, clamp on receipt
  double drift_deg_per_m = 0.0;  // optional odometry heading drift
};

RobotConfig robot_config_from(const ConfigFile& cfg);

// Plant adapter: consumes /cmd_vel, steps the simulated base, and publishes
// /odom at a fixed rate. Integration splits exactly at command arrival stamps
// and at watchdog expiry, so command timing never aliases with the tick rate.
class RobotApiNode {
 public:
  RobotApiNode(Bus& bus, Scheduler& sched, SimWorld& sim, RobotConfig cfg,
               const std::string& node_name = "robot_api");

  const RobotConfig& config() const { return cfg_; }

  // Re-zeroes the odometry frame at the current true pose.
  void reset_odometry();

 private:
  void tick(double t);
  void integrate(double a, double b);
  void publish_odom(double t);
  Twist clamp(const Twist& in) const;

  Bus& bus_;
  Scheduler& sched_;
  SimWorld& sim_;
  RobotConfig cfg_;
  Publisher odom_pub_;
  SubscriptionPtr cmd_sub_;
  Rng odom_rng_;

  Twist active_{};
  double last_cmd_stamp_ = -std::numeric_limits<double>::infinity();
  double last_tick_ = 0.0;
  Pose2D reset_pose_;
  double drift_bias_deg_ = 0.0;
  double traveled_at_reset_ = 0.0;
  std::uint64_t seq_ = 0;
};

}  // namespace navstack
