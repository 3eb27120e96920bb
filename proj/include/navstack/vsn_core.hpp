#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "navstack/bus.hpp"
#include "navstack/config.hpp"
#include "navstack/geometry.hpp"
#include "navstack/messages.hpp"
#include "navstack/scheduler.hpp"

namespace navstack {

// Per-ray temporal median over frames captured back-to-back while stationary.
// Zeros mark dropouts and are excluded from a ray's sample set when at least
// one nonzero reading exists; all-zero rays stay 0. Even sample counts take
// the lower median so the output is always one of the observed readings. The
// output stamp is the newest constituent stamp.
DepthScan median_filter(const std::vector<DepthScan>& frames);

// GPS+compass emulation: pose of `current` expressed in the frame of `start`
// (returned heading_deg is the compass value, (current - start) mod 360).
Pose2D relative_odom(const OdomSample& current, const OdomSample& start);

// True iff the minimum nonzero reading within +/- cone_deg/2 of the scan
// center is below threshold_m. Dropout-only cones do not block.
bool obstacle_guard(const DepthScan& depth, double threshold_m,
                    double cone_deg);

// Everything a policy gets to see for one decision.
struct Observation {
  SemanticScan semantic;       // newest frame of the capture window
  DepthScan depth;             // temporal median over the capture window
  Pose2D gps;                  // x, y relative to the episode start
  double compass_deg = 0.0;    // heading relative to the episode start
  std::optional<DiscreteAction> last_action;  // as executed
  int steps_used = 0;
  int steps_left = 0;
};

struct VsnConfig {
  std::optional<Category> target;   // overridable per run
  int median_window = 5;            // odd; frames per observation
  int max_steps = 150;
  double obstacle_threshold_m = 0.3;
  double obstacle_cone_deg = 30.0;  // full cone width centered on the scan
  double service_timeout_s = 300.0; // wall-clock guard on service calls
  bool store_frames = false;        // keep per-step scans in the log
};

// Reads the `vsn.*` section; missing keys take defaults. Rejects even median
// windows and unknown target categories.
VsnConfig vsn_config_from(const ConfigFile& file);
VsnConfig load_vsn_config(const std::string& path);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual void begin(Category target, unsigned long long seed) = 0;
  virtual DiscreteAction decide(const Observation& obs) = 0;
};

enum class EpisodeStatus {
  running,
  success_claimed,
  limit_reached,
  move_failed,
  collision,
};

const char* to_string(EpisodeStatus s);
EpisodeStatus episode_status_from_string(const std::string& s);

struct StepRecord {
  int index = 0;
  DiscreteAction intended;   // what the policy asked for
  DiscreteAction executed;   // after any guard substitution
  bool guard_triggered = false;
  MoveResult result;
  Pose2D odom_pose;          // episode-relative pose after the action
  double call_stamp = 0.0;   // simulation time the action was issued
  double stamp = 0.0;        // simulation time the action completed
  std::optional<DepthScan> depth_frame;        // kept when store_frames is on
  std::optional<SemanticScan> semantic_frame;
};

struct EpisodeLog {
  std::string id;
  Category target = Category::chair;
  int start_index = 0;       // 1-based; 0 when not part of a suite
  std::string policy;
  unsigned long long seed = 0;
  EpisodeStatus status = EpisodeStatus::running;
  std::vector<StepRecord> actions;
  Pose2D start_pose;         // ground truth, filled by the harness
  Pose2D final_pose;         // ground truth, filled by the harness
  std::optional<double> distance_to_target_at_stop;  // meters, ground truth
  double total_path_length_m = 0.0;  // achieved forward/backward displacement
  double total_sim_time_s = 0.0;
  std::vector<std::string> observation_refs;  // stored frame files
  std::vector<Pose2D> truth_trail;   // filled when a truth hook is installed
  std::vector<Pose2D> odom_trail;
  std::string world_fingerprint;
};

struct FramePair {
  SemanticScan semantic;
  DepthScan depth;
};

// Pumps the scheduler until `count` camera frame pairs with stamps at or
// after the call time arrive, returned oldest first. Throws after timeout_s
// of simulated time without enough frames.
std::vector<FramePair> await_fresh_frames(Bus& bus, Scheduler& sched,
                                          int count, const std::string& node,
                                          double timeout_s = 30.0);

// Sends one discrete action through the /discrete_move service, applying the
// forward obstacle guard against the depth the policy saw. Service-level
// failures (timeout, busy, missing) come back as failed MoveResults rather
// than exceptions.
class ActionExecutor {
 public:
  ActionExecutor(Bus& bus, const VsnConfig& cfg);

  StepRecord execute(const DiscreteAction& intended, const DepthScan& depth,
                     int index);

 private:
  Bus& bus_;
  VsnConfig cfg_;
};

// Drives the capture -> infer -> move -> confirm loop until the policy stops,
// the step budget runs out, or an action fails. The camera and robot nodes
// must already be wired on the bus.
class EpisodeRunner {
 public:
  EpisodeRunner(Bus& bus, Scheduler& sched, const VsnConfig& cfg);

  EpisodeLog run(Policy& policy, Category target, unsigned long long seed);

  // Optional ground-truth hook; when set the log carries true poses.
  std::function<Pose2D()> truth_pose;

 private:
  Observation sense();

  Bus& bus_;
  Scheduler& sched_;
  VsnConfig cfg_;
  ActionExecutor exec_;
  SubscriptionPtr odom_sub_;
  SubscriptionPtr color_sub_;
  SubscriptionPtr depth_sub_;
  std::optional<OdomSample> origin_;
  std::optional<OdomSample> last_odom_;
};

}  // namespace navstack
