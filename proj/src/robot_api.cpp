#include "navstack/robot_api.hpp"

#include <algorithm>
#include <cmath>

namespace navstack {

RobotConfig robot_config_from(const ConfigFile& cfg) {
  RobotConfig r;
  r.odom_rate_hz = cfg.get_double("robot.odom_rate_hz", r.odom_rate_hz);
  r.watchdog_s = cfg.get_double("robot.watchdog_s", r.watchdog_s);
  r.max_linear = cfg.get_double("robot.max_linear_velocity", r.max_linear);
  r.max_angular = cfg.get_double("robot.max_angular_velocity", r.max_angular);
  r.drift_deg_per_m = cfg.get_double("robot.drift_deg_per_m", r.drift_deg_per_m);
  if (!(r.odom_rate_hz > 0.0)) throw Error("robot config: odom_rate_hz must be positive");
  if (!(r.watchdog_s > 0.0)) throw Error("robot config: watchdog_s must be positive");
  if (!(r.max_linear > 0.0) || !(r.max_angular > 0.0)) {
    throw Error("robot config: velocity limits must be positive");
  }
  return r;
}

RobotApiNode::RobotApiNode(Bus& bus, Scheduler& sched, SimWorld& sim,
                           RobotConfig cfg, const std::string& node_name)
    : bus_(bus),
      sched_(sched),
      sim_(sim),
      cfg_(cfg),
      odom_rng_(mix_seed(sim.noise().rng_seed, 0x0d03)) {
  odom_pub_ = bus_.advertise("/odom", node_name);
  cmd_sub_ = bus_.subscribe("/cmd_vel", 64, node_name);
  bus_.register_service("/reset_odometry", node_name,
                        [this](const ServiceRequest&) -> ServiceResponse {
                          reset_odometry();
                          return Ack{true};
                        });
  reset_pose_ = sim_.pose();
  last_tick_ = sched_.now();
  double period = 1.0 / cfg_.odom_rate_hz;
  sched_.schedule_every(period, sched_.now() + period,
                        [this](double t) { tick(t); });
}

Twist RobotApiNode::clamp(const Twist& in) const {
  Twist out = in;
  out.v = std::clamp(out.v, -cfg_.max_linear, cfg_.max_linear);
  out.w = std::clamp(out.w, -cfg_.max_angular, cfg_.max_angular);
  return out;
}

void RobotApiNode::reset_odometry() {
  reset_pose_ = sim_.pose();
  drift_bias_deg_ = 0.0;
  traveled_at_reset_ = sim_.traveled_m();
}

void RobotApiNode::integrate(double a, double b) {
  if (b <= a) return;
  if (active_.v == 0.0 && active_.w == 0.0) return;
  double cutoff = last_cmd_stamp_ + cfg_.watchdog_s;
  if (cutoff <= a) return;
  double end = std::min(b, cutoff);
  sim_.apply(active_, end - a);
}

void RobotApiNode::tick(double t) {
  double cursor = last_tick_;
  for (auto& env : cmd_sub_->drain()) {
    if (const auto* tw = std::get_if<Twist>(&env.payload)) {
      double stamp = std::clamp(env.stamp, cursor, t);
      integrate(cursor, stamp);
      cursor = stamp;
      active_ = clamp(*tw);
      last_cmd_stamp_ = env.stamp;
    }
  }
  integrate(cursor, t);
  last_tick_ = t;
  publish_odom(t);
}

void RobotApiNode::publish_odom(double t) {
  const NoiseModel& noise = sim_.noise();
  Pose2D rel = relative_to(sim_.pose(), reset_pose_);
  if (cfg_.drift_deg_per_m != 0.0) {
    drift_bias_deg_ = cfg_.drift_deg_per_m * (sim_.traveled_m() - traveled_at_reset_);
  }
  OdomSample s;
  s.x = rel.x;
  s.y = rel.y;
  s.heading_deg = rel.heading_deg;
  if (noise.odom_xy_sigma > 0.0) {
    s.x += odom_rng_.normal(0.0, noise.odom_xy_sigma);
    s.y += odom_rng_.normal(0.0, noise.odom_xy_sigma);
  }
  if (noise.odom_heading_sigma_deg > 0.0) {
    s.heading_deg += odom_rng_.normal(0.0, noise.odom_heading_sigma_deg);
  }
  s.heading_deg = normalize_deg(s.heading_deg + drift_bias_deg_);
  s.stamp = t;
  s.seq = ++seq_;
  s.collision = sim_.take_collision_latch();
  odom_pub_.publish(s);
}

}  // namespace navstack
