#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "navstack/planner.hpp"
#include "navstack/rng.hpp"
#include "navstack/vsn_core.hpp"
#include "navstack/world.hpp"

namespace navstack {

// Modular policies emit short-term goals; end-to-end policies emit discrete
// actions directly.
struct ShortTermGoal {
  Vec2 point;
};
using PolicyAction = std::variant<DiscreteAction, ShortTermGoal>;

struct Detection {
  Category category = Category::chair;
  double distance_m = 0.0;  // to the instance centroid
  double confidence = 1.0;
};

struct ViewScore {
  int view_index = 0;
  double value = 0.0;  // higher = more promising
  std::optional<Detection> detection;
};

// One exploration node: 12 views at headings h0 + k*30, k = 0..11.
struct PanoramaNode {
  std::vector<FramePair> views;
  Pose2D pose;  // pose when the node was opened (heading h0)
  int node_id = 0;
};

inline constexpr int kPanoramaViews = 12;
inline constexpr double kPanoramaTurnDeg = 30.0;

// Rotates in place through 12 left turns of 30 degrees, capturing one frame
// pair before each turn, so the views sit at pose.heading + k*30 and the
// final turn restores the opening heading. The turns go through the
// /discrete_move service and count as discrete actions; a failed turn
// throws. Requires the camera and motion nodes wired on the bus.
PanoramaNode capture_panorama(Bus& bus, Scheduler& sched, const Pose2D& pose,
                              int node_id = 0, double timeout_s = 30.0);

// Stands in for the learned value function + detector pair.
class ViewScorer {
 public:
  virtual ~ViewScorer() = default;
  virtual void reset(unsigned long long seed) { (void)seed; }
  virtual ViewScore score(const FramePair& view, Category target) = 0;
};

// value = 10 / (1 + nearest hit distance) when the target is visible in the
// semantic scan (detection carries the centroid range, which the stop rule
// compares against the success radius), else the mean nonzero depth
// (exploration heuristic). The miss probability knob randomly suppresses
// detections to emulate a flaky detector.
class HeuristicScorer : public ViewScorer {
 public:
  explicit HeuristicScorer(double miss_probability = 0.0);
  void reset(unsigned long long seed) override;
  ViewScore score(const FramePair& view, Category target) override;

 private:
  double miss_probability_;
  Rng rng_;
};

std::vector<ViewScore> score_views(const PanoramaNode& node, Category target,
                                   ViewScorer& scorer);

// Argmax of value; ties break toward the lowest view index. The filtered
// overload returns -1 when every view is excluded.
int select_direction(const std::vector<ViewScore>& scores);
int select_direction(const std::vector<ViewScore>& scores,
                     const std::vector<bool>& excluded);

// Point offset_m along heading pose.heading + view_index * 30 degrees. The
// grid-aware overload clips back along the ray to the last non-occupied cell.
Vec2 project_short_term_goal(const Pose2D& pose, int view_index,
                             double offset_m = 1.5);
Vec2 project_short_term_goal(const Pose2D& pose, int view_index,
                             const OccupancyGrid& grid, double offset_m = 1.5);

// Maps the 7-token extended action vocabulary (MOVE_FORWARD, MOVE_BACKWARD,
// TURN_LEFT, TURN_RIGHT, STOP, LOOK_UP, LOOK_DOWN) onto the 5-action base
// set with 0.25 m / 30 degree magnitudes. Unknown tokens throw.
DiscreteAction remap_action(const std::string& token);

struct VlvConfig {
  double goal_offset_m = 1.5;
  double stop_distance_m = 1.0;   // detection distance that triggers STOP
  double resolution = kDefaultResolution;
  double inflate_radius_m = 0.22;
  double step_m = 0.25;
  double turn_deg = 30.0;
  double arrive_tol_m = 0.25;
};

// Episode-long occupancy accumulation plus geodesic planning.
class VlvPlanner {
 public:
  explicit VlvPlanner(double resolution = kDefaultResolution,
                      double inflate_radius = 0.22);

  void add_scan(const DepthScan& depth, const Pose2D& pose);
  const OccupancyGrid& inflated() const;
  // Waypoint path from -> goal on the inflated grid, or nothing when the
  // goal is unreachable with current knowledge.
  std::optional<std::vector<Vec2>> plan(const Vec2& from, const Vec2& goal) const;
  std::size_t scan_count() const { return scans_.size(); }

 private:
  double resolution_;
  double inflate_radius_;
  std::vector<std::pair<DepthScan, Pose2D>> scans_;
  mutable std::optional<OccupancyGrid> cache_;
};

enum class VlvPhase { panorama, transit };

struct VlvState {
  Category target = Category::chair;
  VlvPhase phase = VlvPhase::panorama;
  std::vector<FramePair> views;
  Pose2D node_pose;
  int node_id = 0;
  std::vector<ViewScore> scores;    // cached per node
  std::vector<bool> excluded;       // per view, planner-unreachable
  std::vector<DiscreteAction> leg;  // open-loop transit actions for this leg
  std::size_t leg_next = 0;
  std::optional<Vec2> goal;
  std::optional<DiscreteAction> last_returned;
  bool stopped = false;
  bool gave_up = false;             // all directions exhausted
};

// One step of the modular state machine: capture/turn while building the
// panorama, then score, select, and emit a ShortTermGoal (zero-cost), then
// transit actions until the leg completes and a new node opens.
PolicyAction vlv_policy_step(VlvState& state, const Observation& obs,
                             VlvPlanner& planner, ViewScorer& scorer,
                             const VlvConfig& cfg);

class VlvPolicy : public Policy {
 public:
  explicit VlvPolicy(std::shared_ptr<ViewScorer> scorer = nullptr,
                     VlvConfig cfg = {});
  std::string name() const override { return "vlv"; }
  void begin(Category target, unsigned long long seed) override;
  DiscreteAction decide(const Observation& obs) override;

  const VlvState& state() const { return state_; }
  const VlvPlanner& planner() const { return planner_; }

 private:
  std::shared_ptr<ViewScorer> scorer_;
  VlvConfig cfg_;
  VlvState state_;
  VlvPlanner planner_;
};

struct OracleConfig {
  double stop_distance_m = 0.9;  // margin inside the 1 m success radius
  double resolution = kDefaultResolution;
  // Covers the robot radius plus the follower's worst-case corner cut, while
  // still leaving reachable goal cells inside the stop radius of wide objects.
  double inflate_radius_m = 0.35;
  double step_m = 0.25;
  double turn_deg = 30.0;
  double arrive_tol_m = 0.2;
};

// Ground-truth upper bound: plans on the true map to the nearest instance of
// the target and stops inside the success radius. Not a navigation result,
// a harness soundness check.
class OraclePolicy : public Policy {
 public:
  OraclePolicy(const WorldMap& world, const Pose2D& start_pose,
               OracleConfig cfg = {});
  std::string name() const override { return "oracle"; }
  void begin(Category target, unsigned long long seed) override;
  DiscreteAction decide(const Observation& obs) override;

 private:
  std::vector<Vec2> plan_from(const Vec2& pos) const;
  DiscreteAction aim_at(const Vec2& point, const Pose2D& pose) const;

  const WorldMap& world_;
  Pose2D start_;
  OracleConfig cfg_;
  OccupancyGrid grid_;  // rasterized truth, inflated
  Category target_ = Category::chair;
};

// Negative control: uniform over {MOVE_FORWARD, TURN_LEFT, TURN_RIGHT} with
// STOP probability 0.02 per step; ignores the observation.
class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(double stop_probability = 0.02);
  std::string name() const override { return "random"; }
  void begin(Category target, unsigned long long seed) override;
  DiscreteAction decide(const Observation& obs) override;

 private:
  double stop_probability_;
  Rng rng_;
};

// Factory context: oracle policies need ground truth, scorers need the
// detector-noise knob.
struct PolicyContext {
  const WorldMap* world = nullptr;
  Pose2D start_pose;
  VsnConfig vsn;
  double scorer_miss_probability = 0.0;
};

using PolicyFactory = std::function<std::unique_ptr<Policy>(const PolicyContext&)>;

// "vlv", "random", and "oracle" are built in; external policies attach here
// under their own names.
void register_policy(const std::string& name, PolicyFactory factory);
std::unique_ptr<Policy> make_policy(const std::string& name,
                                    const PolicyContext& ctx);
std::vector<std::string> policy_names();

}  // namespace navstack
