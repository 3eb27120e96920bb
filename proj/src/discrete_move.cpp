#include "navstack/discrete_move.hpp"

#include <algorithm>
#include <cmath>

namespace navstack {

namespace {

// Tapered final-approach bands. Inside the band the commanded speed falls
// proportionally with the remaining error so one odometry interval of motion
// cannot carry the robot past the stop decision and out of tolerance.
constexpr double kLinearTaperBand = 0.010;   // m
constexpr double kAngularTaperBandDeg = 0.5; // deg
constexpr double kLinearFineFloor = 0.002;   // m/s
constexpr double kAngularFineFloor = 0.005;  // rad/s
constexpr double kOdomFreshWindow = 1.0;     // s of silence that aborts

double validate_positive(double v, const char* key) {
  if (!(v > 0.0)) {
    throw Error(std::string("discrete_move config: '") + key + "' must be positive");
  }
  return v;
}

}  // namespace

MotionConfig motion_config_from(const ConfigFile& cfg) {
  MotionConfig m;
  m.linear_velocity =
      validate_positive(cfg.get_double("discrete_move.linear_velocity", m.linear_velocity),
                        "linear_velocity");
  m.angular_velocity =
      validate_positive(cfg.get_double("discrete_move.angular_velocity", m.angular_velocity),
                        "angular_velocity");
  if (cfg.has("discrete_move.accel_decel_distance")) {
    m.accel_decel_distance = validate_positive(
        cfg.get_double("discrete_move.accel_decel_distance", -1.0), "accel_decel_distance");
  }
  m.timeout_s = validate_positive(cfg.get_double("discrete_move.timeout_s", m.timeout_s),
                                  "timeout_s");
  return m;
}

MotionConfig load_motion_config(const std::string& path) {
  return motion_config_from(ConfigFile::load(path));
}

DiscreteMoveNode::DiscreteMoveNode(Bus& bus, Scheduler& sched, MotionConfig cfg,
                                   const std::string& node_name)
    : bus_(bus), sched_(sched), cfg_(cfg) {
  cmd_pub_ = bus_.advertise("/cmd_vel", node_name);
  odom_sub_ = bus_.subscribe("/odom", 64, node_name);
  Bus::ServiceOptions opts;
  opts.reject_when_busy = true;
  bus_.register_service(kServiceName, node_name,
                        [this](const ServiceRequest& req) -> ServiceResponse {
                          if (const auto* a = std::get_if<DiscreteAction>(&req)) {
                            return execute(*a);
                          }
                          MoveResult r;
                          r.error = "unsupported request payload";
                          return r;
                        },
                        opts);
}

void DiscreteMoveNode::poll_odom() {
  for (auto& env : odom_sub_->drain()) {
    if (const auto* s = std::get_if<OdomSample>(&env.payload)) {
      if (s->collision) collision_seen_ = true;
      if (!have_odom_ || s->stamp >= latest_odom_.stamp) {
        latest_odom_ = *s;
        have_odom_ = true;
      }
    }
  }
}

bool DiscreteMoveNode::await_start_sample(double t0, OdomSample& out) {
  double tick = 1.0 / cfg_.controller_rate_hz;
  double deadline = t0 + kOdomFreshWindow + 2.0 * tick;
  while (sched_.now() <= deadline) {
    poll_odom();
    if (have_odom_ && latest_odom_.stamp >= t0) {
      out = latest_odom_;
      return true;
    }
    sched_.run_until(sched_.now() + tick);
  }
  return false;
}

void DiscreteMoveNode::command(double v, double w) { cmd_pub_.publish(Twist{v, w}); }

MoveResult DiscreteMoveNode::execute(const DiscreteAction& action) {
  if (trace_enabled_) trace_.clear();
  collision_seen_ = false;
  double t0 = sched_.now();

  MoveResult fail;
  fail.elapsed_s = 0.0;

  if (action.kind == ActionKind::stop) {
    command(0.0, 0.0);
    poll_odom();
    MoveResult r;
    r.success = true;
    r.start_odom = latest_odom_;
    r.final_odom = latest_odom_;
    return r;
  }

  if (!(action.magnitude > 0.0)) {
    fail.error = "action magnitude must be positive";
    return fail;
  }

  OdomSample start;
  if (!await_start_sample(t0, start)) {
    command(0.0, 0.0);
    fail.error = "odometry stream silent";
    fail.elapsed_s = sched_.now() - t0;
    return fail;
  }

  if (action.kind == ActionKind::turn_left || action.kind == ActionKind::turn_right) {
    return run_turn(action, start, t0);
  }
  return run_move(action, start, t0);
}

MoveResult DiscreteMoveNode::run_turn(const DiscreteAction& action,
                                      const OdomSample& start, double t0) {
  const double dir = action.kind == ActionKind::turn_left ? 1.0 : -1.0;
  const double mag = action.magnitude;  // degrees
  const double target = normalize_deg(start.heading_deg + dir * mag);
  const double tol = cfg_.tolerance_turn_deg;
  const double cruise = cfg_.angular_velocity;
  const double acc_dist = deg_to_rad(mag) / 3.0;
  const double accel = cruise * cruise / (2.0 * acc_dist);
  const double dt = 1.0 / cfg_.controller_rate_hz;
  const double slew = accel * dt + cfg_.creep_angular;

  MoveResult res;
  res.start_odom = start;
  res.target_heading_deg = target;

  // Unwrapped heading so magnitudes above 180 degrees track correctly.
  double unwrapped = start.heading_deg;
  double last_heading = start.heading_deg;
  double prev_cmd = 0.0;
  bool verifying = false;
  double verify_after = 0.0;
  double tick = sched_.now();

  auto finish = [&](const OdomSample& fin, bool ok, const std::string& err) {
    res.final_odom = fin;
    res.final_turn_error_deg = turn_error_deg(target, fin.heading_deg);
    res.final_straight_error_m =
        straight_error_m(0.0, fin.x, fin.y, start.x, start.y);
    res.elapsed_s = sched_.now() - t0;
    res.success = ok;
    res.error = err;
    return res;
  };

  while (true) {
    tick += dt;
    sched_.run_until(tick);
    poll_odom();

    if (collision_seen_) {
      command(0.0, 0.0);
      res.collision = true;
      return finish(latest_odom_, false, "contact during turn");
    }
    if (sched_.now() - latest_odom_.stamp > kOdomFreshWindow) {
      command(0.0, 0.0);
      return finish(latest_odom_, false, "odometry stream silent");
    }
    if (sched_.now() - t0 > cfg_.timeout_s) {
      command(0.0, 0.0);
      return finish(latest_odom_, false, "action timeout");
    }

    unwrapped += signed_deg(latest_odom_.heading_deg - last_heading);
    last_heading = latest_odom_.heading_deg;
    double covered = dir * (unwrapped - start.heading_deg);
    double remaining = mag - covered;  // degrees, positive in action direction

    if (verifying) {
      if (latest_odom_.stamp <= verify_after) continue;
      double e1 = turn_error_deg(target, latest_odom_.heading_deg);
      if (e1 < tol || e1 > 360.0 - tol) {
        return finish(latest_odom_, true, "");
      }
      if (remaining >= tol) {
        verifying = false;  // undershoot: resume in the action direction
        prev_cmd = 0.0;
      }
      // Overshoot: direction consistency forbids reversing a turn; hold at
      // rest and let the next samples settle the verdict.
      continue;
    }

    if (remaining < tol / 2.0) {
      command(0.0, 0.0);
      verify_after = sched_.now();
      verifying = true;
      continue;
    }

    double rem_rad = deg_to_rad(std::max(0.0, remaining));
    double cov_rad = deg_to_rad(std::clamp(covered, 0.0, mag));
    ProfilePhase phase;
    double w;
    if (remaining < kAngularTaperBandDeg) {
      phase = ProfilePhase::decel;
      w = std::max(kAngularFineFloor,
                   cfg_.creep_angular * remaining / kAngularTaperBandDeg);
    } else if (cov_rad < acc_dist) {
      phase = ProfilePhase::accel;
      w = std::max(cfg_.creep_angular, profile_speed(0.0, accel, cov_rad, phase, cruise));
    } else if (rem_rad < acc_dist) {
      phase = ProfilePhase::decel;
      w = std::max(cfg_.creep_angular, profile_speed(0.0, accel, rem_rad, phase, cruise));
    } else {
      phase = ProfilePhase::cruise;
      w = cruise;
    }
    w = std::clamp(w, prev_cmd - slew, prev_cmd + slew);
    w = std::min(w, cruise);
    prev_cmd = w;
    command(0.0, dir * w);
    if (trace_enabled_) {
      trace_.push_back({sched_.now(), cov_rad, rem_rad, dir * w, phase});
    }
  }
}

MoveResult DiscreteMoveNode::run_move(const DiscreteAction& action,
                                      const OdomSample& start, double t0) {
  const double dir = action.kind == ActionKind::move_forward ? 1.0 : -1.0;
  const bool forward = action.kind == ActionKind::move_forward;
  const double mag = action.magnitude;  // meters
  const double tol = cfg_.tolerance_straight_m;
  const double cruise = cfg_.linear_velocity;
  double acc_dist = cfg_.accel_decel_distance > 0.0
                        ? std::min(cfg_.accel_decel_distance, mag / 2.0)
                        : mag / 3.0;
  const double accel = cruise * cruise / (2.0 * acc_dist);
  const double dt = 1.0 / cfg_.controller_rate_hz;
  const double slew = accel * dt + cfg_.creep_linear;

  MoveResult res;
  res.start_odom = start;
  res.commanded_distance_m = mag;
  res.target_heading_deg = start.heading_deg;

  double prev_cmd = 0.0;
  bool verifying = false;
  double verify_after = 0.0;
  double tick = sched_.now();

  auto finish = [&](const OdomSample& fin, bool ok, const std::string& err) {
    res.final_odom = fin;
    res.final_straight_error_m = straight_error_m(mag, fin.x, fin.y, start.x, start.y);
    res.final_turn_error_deg = turn_error_deg(start.heading_deg, fin.heading_deg);
    res.elapsed_s = sched_.now() - t0;
    res.success = ok;
    res.error = err;
    return res;
  };

  while (true) {
    tick += dt;
    sched_.run_until(tick);
    poll_odom();

    if (collision_seen_) {
      command(0.0, 0.0);
      res.collision = true;
      return finish(latest_odom_, false, "contact during move");
    }
    if (sched_.now() - latest_odom_.stamp > kOdomFreshWindow) {
      command(0.0, 0.0);
      return finish(latest_odom_, false, "odometry stream silent");
    }
    if (sched_.now() - t0 > cfg_.timeout_s) {
      command(0.0, 0.0);
      return finish(latest_odom_, false, "action timeout");
    }

    double covered = std::hypot(latest_odom_.x - start.x, latest_odom_.y - start.y);
    double remaining = mag - covered;

    if (verifying) {
      if (latest_odom_.stamp <= verify_after) continue;
      double e2 = straight_error_m(mag, latest_odom_.x, latest_odom_.y, start.x, start.y);
      if (std::abs(e2) < tol) {
        return finish(latest_odom_, true, "");
      }
      if (remaining >= tol || (forward && remaining <= -tol)) {
        verifying = false;  // creep again; reverse correction for forward only
        prev_cmd = 0.0;
      }
      continue;
    }

    if (std::abs(remaining) < tol / 2.0) {
      command(0.0, 0.0);
      verify_after = sched_.now();
      verifying = true;
      continue;
    }
    if (remaining < 0.0 && !forward) {
      // Backward overshoot may not be corrected with positive v; settle.
      command(0.0, 0.0);
      verify_after = sched_.now();
      verifying = true;
      continue;
    }

    double sign = remaining >= 0.0 ? 1.0 : -1.0;  // -1 only for forward
    double err = std::abs(remaining);
    ProfilePhase phase;
    double v;
    if (err < kLinearTaperBand) {
      phase = ProfilePhase::decel;
      v = std::max(kLinearFineFloor, cfg_.creep_linear * err / kLinearTaperBand);
    } else if (sign < 0.0) {
      phase = ProfilePhase::decel;
      v = cfg_.creep_linear;
    } else if (covered < acc_dist) {
      phase = ProfilePhase::accel;
      v = std::max(cfg_.creep_linear, profile_speed(0.0, accel, covered, phase, cruise));
    } else if (remaining < acc_dist) {
      phase = ProfilePhase::decel;
      v = std::max(cfg_.creep_linear, profile_speed(0.0, accel, remaining, phase, cruise));
    } else {
      phase = ProfilePhase::cruise;
      v = cruise;
    }
    double signed_target = sign * v;
    signed_target = std::clamp(signed_target, prev_cmd - slew, prev_cmd + slew);
    signed_target = std::clamp(signed_target, -cruise, cruise);
    prev_cmd = signed_target;
    command(dir * signed_target, 0.0);
    if (trace_enabled_) {
      trace_.push_back({sched_.now(), covered, remaining, dir * signed_target, phase});
    }
  }
}

}  // namespace navstack
