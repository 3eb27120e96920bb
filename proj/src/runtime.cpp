#include "navstack/runtime.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

#include "navstack/policies.hpp"
#include "navstack/rng.hpp"

namespace navstack {

namespace {

// Keeps the plant's noise stream distinct from policy and scorer streams
// that are derived from the same episode seed.
constexpr std::uint64_t kPlantSeedSalt = 0x77a3d1b5ULL;

}  // namespace

StackConfig stack_config_from(const ConfigFile& file) {
  StackConfig cfg;
  cfg.motion = motion_config_from(file);
  cfg.robot = robot_config_from(file);
  cfg.camera = camera_config_from(file);
  cfg.vsn = vsn_config_from(file);
  cfg.noise.actuation_scale_sigma =
      file.get_double("noise.actuation_scale_sigma", 0.0);
  cfg.noise.odom_xy_sigma = file.get_double("noise.odom_xy_sigma", 0.0);
  cfg.noise.odom_heading_sigma_deg =
      file.get_double("noise.odom_heading_sigma_deg", 0.0);
  cfg.noise.depth_gaussian_sigma =
      file.get_double("noise.depth_gaussian_sigma", 0.0);
  cfg.noise.depth_impulse_prob =
      file.get_double("noise.depth_impulse_prob", 0.0);
  cfg.noise.depth_dropout_prob =
      file.get_double("noise.depth_dropout_prob", 0.0);
  return cfg;
}

StackConfig load_stack_config(const std::string& path) {
  return stack_config_from(ConfigFile::load(path));
}

Stack::Stack(const WorldMap& world, const Pose2D& start,
             const StackConfig& cfg, unsigned long long seed)
    : cfg_(cfg), clock_(std::make_shared<SimClock>()) {
  sched_ = std::make_unique<Scheduler>(clock_);
  bus_ = std::make_unique<Bus>(clock_);
  bus_->remap("/mobile_base/commands/velocity", "/cmd_vel");
  NoiseModel noise = cfg_.noise;
  noise.rng_seed = mix_seed(seed, kPlantSeedSalt);
  sim_ = std::make_unique<SimWorld>(world, RobotState{start}, noise);
  robot_ = std::make_unique<RobotApiNode>(*bus_, *sched_, *sim_, cfg_.robot);
  camera_ = std::make_unique<CameraApiNode>(*bus_, *sched_, *sim_, cfg_.camera);
  move_ = std::make_unique<DiscreteMoveNode>(*bus_, *sched_, cfg_.motion);
}

void assert_topology(const Topology& topo, bool expect_vsn) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(std::string("runtime graph check failed: ") + what);
  };
  require(topo.has_edge_pub("discrete_move", "/cmd_vel"),
          "discrete_move must publish /cmd_vel");
  require(topo.has_edge_sub("robot_api", "/cmd_vel"),
          "robot_api must consume /cmd_vel");
  require(topo.has_edge_pub("robot_api", "/odom"),
          "robot_api must publish /odom");
  require(topo.has_edge_sub("discrete_move", "/odom"),
          "discrete_move must consume /odom");
  require(topo.has_edge_pub("camera_api", "/camera/color"),
          "camera_api must publish /camera/color");
  require(topo.has_edge_pub("camera_api", "/camera/depth"),
          "camera_api must publish /camera/depth");
  require(topo.has_service("/discrete_move"),
          "/discrete_move service must be registered");
  require(topo.has_service("/reset_odometry"),
          "/reset_odometry service must be registered");
  if (expect_vsn) {
    require(topo.has_edge_sub("vsn_core", "/odom"),
            "vsn_core must consume /odom");
    require(topo.has_edge_sub("vsn_core", "/camera/color"),
            "vsn_core must consume /camera/color");
    require(topo.has_edge_sub("vsn_core", "/camera/depth"),
            "vsn_core must consume /camera/depth");
  }
}

namespace {

void reset_odometry_frame(Stack& stack, double timeout_s) {
  const CallResult r =
      stack.bus().call("/reset_odometry", ServiceRequest{ResetOdometry{}},
                       timeout_s);
  if (r.status != CallStatus::ok) {
    throw Error(std::string("/reset_odometry call failed: ") +
                to_string(r.status));
  }
}

std::string episode_id(const std::string& policy, Category target,
                       int start_index) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s_%s_s%02d", policy.c_str(),
                to_string(target), start_index);
  return buf;
}

}  // namespace

EpisodeLog run_episode_instance(const WorldMap& world, const StackConfig& cfg,
                                const EpisodeParams& params) {
  if (params.start_index < 1 ||
      params.start_index > static_cast<int>(world.starts.size())) {
    throw Error("start index " + std::to_string(params.start_index) +
                " out of range 1.." + std::to_string(world.starts.size()));
  }
  const Pose2D start = world.starts[params.start_index - 1];
  Stack stack(world, start, cfg, params.seed);
  reset_odometry_frame(stack, cfg.vsn.service_timeout_s);

  EpisodeRunner runner(stack.bus(), stack.scheduler(), cfg.vsn);
  runner.truth_pose = [&stack] { return stack.sim().pose(); };
  assert_topology(stack.bus().topology(), /*expect_vsn=*/true);

  PolicyContext ctx;
  ctx.world = &world;
  ctx.start_pose = start;
  ctx.vsn = cfg.vsn;
  ctx.scorer_miss_probability = params.scorer_miss_probability;
  std::unique_ptr<Policy> policy = make_policy(params.policy_name, ctx);

  EpisodeLog log = runner.run(*policy, params.target, params.seed);
  log.id = episode_id(log.policy, params.target, params.start_index);
  log.start_index = params.start_index;
  log.start_pose = start;
  log.final_pose = stack.sim().pose();
  log.world_fingerprint = world_fingerprint(world);
  if (log.status == EpisodeStatus::success_claimed &&
      world.has_category(params.target)) {
    log.distance_to_target_at_stop =
        distance_to_object(world, log.final_pose.position(), params.target);
  }
  return log;
}

ReplayResult replay_episode(const EpisodeLog& log, const WorldMap& world,
                            const StackConfig& cfg) {
  const std::string fp = world_fingerprint(world);
  if (log.world_fingerprint != fp) {
    throw Error("world fingerprint mismatch: log has '" +
                log.world_fingerprint + "', map is '" + fp + "'");
  }
  if (log.start_index < 1 ||
      log.start_index > static_cast<int>(world.starts.size())) {
    throw Error("logged start index " + std::to_string(log.start_index) +
                " out of range 1.." + std::to_string(world.starts.size()));
  }
  const Pose2D start = world.starts[log.start_index - 1];
  Stack stack(world, start, cfg, log.seed);
  assert_topology(stack.bus().topology(), /*expect_vsn=*/false);
  reset_odometry_frame(stack, cfg.vsn.service_timeout_s);

  ReplayResult out;
  for (const StepRecord& s : log.actions) {
    // Advancing to the recorded issue time replays the same sensor ticks in
    // the same order, so the plant noise stream lines up with the original.
    stack.scheduler().run_until(s.call_stamp);
    const CallResult r = stack.bus().call(
        "/discrete_move", ServiceRequest{s.executed}, cfg.vsn.service_timeout_s);
    if (r.status != CallStatus::ok) {
      throw Error("replay of action " + std::to_string(s.index) +
                  " failed: " + to_string(r.status));
    }
    out.truth_trail.push_back(stack.sim().pose());
  }

  out.final_pose = stack.sim().pose();
  const int n = std::max(1, static_cast<int>(log.actions.size()));
  out.position_bound_m = 0.005 * n;
  out.heading_bound_deg = 0.1 * n;
  out.position_error_m =
      (out.final_pose.position() - log.final_pose.position()).norm();
  out.heading_error_deg = std::abs(
      signed_deg(out.final_pose.heading_deg - log.final_pose.heading_deg));
  out.within_bounds = out.position_error_m <= out.position_bound_m &&
                      out.heading_error_deg <= out.heading_bound_deg;
  return out;
}

}  // namespace navstack
