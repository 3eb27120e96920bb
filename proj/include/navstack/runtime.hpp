#pragma once

#include <memory>
#include <string>
#include <vector>

#include "navstack/bus.hpp"
#include "navstack/camera_api.hpp"
#include "navstack/config.hpp"
#include "navstack/discrete_move.hpp"
#include "navstack/robot_api.hpp"
#include "navstack/scheduler.hpp"
#include "navstack/vsn_core.hpp"
#include "navstack/world.hpp"

namespace navstack {

// Launcher configuration for every node in the stack, read from one flat
// config file. noise.rng_seed is overwritten per episode.
struct StackConfig {
  MotionConfig motion;
  RobotConfig robot;
  CameraConfig camera;
  VsnConfig vsn;
  NoiseModel noise;
};

StackConfig stack_config_from(const ConfigFile& file);
StackConfig load_stack_config(const std::string& path);

// One fully wired simulation instance: shared clock, scheduler, bus, plant,
// and the three stack nodes. The base velocity-topic remap is installed
// before any node is wired. Instances are isolated; several can run on
// separate threads at once.
class Stack {
 public:
  Stack(const WorldMap& world, const Pose2D& start, const StackConfig& cfg,
        unsigned long long seed);

  Bus& bus() { return *bus_; }
  Scheduler& scheduler() { return *sched_; }
  SimWorld& sim() { return *sim_; }
  const StackConfig& config() const { return cfg_; }

 private:
  StackConfig cfg_;
  SimClockPtr clock_;
  std::unique_ptr<Scheduler> sched_;
  std::unique_ptr<Bus> bus_;
  std::unique_ptr<SimWorld> sim_;
  std::unique_ptr<RobotApiNode> robot_;
  std::unique_ptr<CameraApiNode> camera_;
  std::unique_ptr<DiscreteMoveNode> move_;
};

// Verifies the runtime graph: discrete_move drives /cmd_vel into robot_api,
// robot_api feeds /odom back to discrete_move (and to vsn_core when the
// episode loop is wired), camera_api publishes both /camera topics, and the
// /discrete_move and /reset_odometry services are up. Throws Error naming
// the first missing edge.
void assert_topology(const Topology& topo, bool expect_vsn);

struct EpisodeParams {
  Category target = Category::chair;
  int start_index = 1;  // 1-based into world.starts
  unsigned long long seed = 0;
  std::string policy_name = "vlv";
  double scorer_miss_probability = 0.0;
};

// Builds an isolated stack, runs one episode, and fills the harness-side log
// fields (id, start/final truth poses, world fingerprint, target distance).
EpisodeLog run_episode_instance(const WorldMap& world, const StackConfig& cfg,
                                const EpisodeParams& params);

struct ReplayResult {
  Pose2D final_pose;  // ground truth after re-execution
  std::vector<Pose2D> truth_trail;
  double position_error_m = 0.0;  // vs the logged final pose
  double heading_error_deg = 0.0;
  double position_bound_m = 0.0;  // 5 mm per executed action
  double heading_bound_deg = 0.0; // 0.1 deg per executed action
  bool within_bounds = false;
};

// Re-executes the logged actions open loop on a fresh stack seeded like the
// original run, aligning each service call to its recorded issue time so the
// simulation replays the same event sequence. Throws Error when the world
// fingerprint does not match the log or an action cannot be re-issued.
ReplayResult replay_episode(const EpisodeLog& log, const WorldMap& world,
                            const StackConfig& cfg);

}  // namespace navstack
