#include "doctest.h"

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "navstack/camera_api.hpp"
#include "navstack/discrete_move.hpp"
#include "navstack/policies.hpp"
#include "navstack/robot_api.hpp"
#include "navstack/world.hpp"

using namespace navstack;

namespace {

WorldMap empty_room(int w, int h, double res) {
  WorldMap world;
  world.grid.width = w;
  world.grid.height = h;
  world.grid.resolution = res;
  world.grid.occ.assign(static_cast<std::size_t>(w) * h, 0);
  for (int ix = 0; ix < w; ++ix) {
    world.grid.set(ix, 0, true);
    world.grid.set(ix, h - 1, true);
  }
  for (int iy = 0; iy < h; ++iy) {
    world.grid.set(0, iy, true);
    world.grid.set(w - 1, iy, true);
  }
  return world;
}

// Two-ray synthetic view: ray 0 is a wall, ray 1 optionally the target.
FramePair view_of(double hit, double centroid, bool visible = true,
                  std::vector<double> depth = {2.0, 3.0},
                  Category label = Category::chair) {
  FramePair v;
  v.depth.ranges = std::move(depth);
  v.semantic.labels = {RayLabel::wall, to_ray_label(label)};
  v.semantic.hit_ranges = {1.0, hit};
  v.semantic.object_ranges = {1.0, centroid};
  v.semantic.visible = {0, visible ? std::uint8_t{1} : std::uint8_t{0}};
  return v;
}

std::vector<ViewScore> score_list(const std::vector<double>& values) {
  std::vector<ViewScore> out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    out.push_back(ViewScore{static_cast<int>(k), values[k], std::nullopt});
  }
  return out;
}

// Noiseless observation rendered from the true pose, reported in the
// episode-start frame the policies plan in.
Observation observe(const WorldMap& world, const Pose2D& start,
                    const Pose2D& pose,
                    std::optional<DiscreteAction> last = std::nullopt) {
  static Rng rng(1);  // unused by noiseless rendering
  Observation obs;
  obs.depth = render_depth(world, pose, SensorGeometry{}, NoiseModel{}, rng);
  obs.semantic = render_semantic(world, pose, SensorGeometry{});
  obs.gps = relative_to(pose, start);
  obs.compass_deg = obs.gps.heading_deg;
  obs.last_action = last;
  return obs;
}

Pose2D apply_ideal(Pose2D pose, const DiscreteAction& a) {
  switch (a.kind) {
    case ActionKind::move_forward:
      pose.x += a.magnitude * std::cos(deg_to_rad(pose.heading_deg));
      pose.y += a.magnitude * std::sin(deg_to_rad(pose.heading_deg));
      break;
    case ActionKind::move_backward:
      pose.x -= a.magnitude * std::cos(deg_to_rad(pose.heading_deg));
      pose.y -= a.magnitude * std::sin(deg_to_rad(pose.heading_deg));
      break;
    case ActionKind::turn_left:
      pose.heading_deg = normalize_deg(pose.heading_deg + a.magnitude);
      break;
    case ActionKind::turn_right:
      pose.heading_deg = normalize_deg(pose.heading_deg - a.magnitude);
      break;
    case ActionKind::stop:
      break;
  }
  return pose;
}

}  // namespace

TEST_CASE("scorer values a visible target by its nearest surface hit") {
  HeuristicScorer scorer;
  const ViewScore s = scorer.score(view_of(1.0, 1.3), Category::chair);
  CHECK(s.value == doctest::Approx(5.0));  // 10 / (1 + 1)
  REQUIRE(s.detection.has_value());
  CHECK(s.detection->category == Category::chair);
  // The stop rule compares against the centroid range, not the surface hit.
  CHECK(s.detection->distance_m == doctest::Approx(1.3));
  CHECK(s.detection->confidence == doctest::Approx(1.0));

  // Closer targets score strictly higher.
  const ViewScore far = scorer.score(view_of(2.0, 2.3), Category::chair);
  CHECK(far.value == doctest::Approx(10.0 / 3.0));
  CHECK(s.value > far.value);

  // Among several matching rays the nearest surface wins.
  FramePair two = view_of(2.0, 2.3);
  two.semantic.labels[0] = to_ray_label(Category::chair);
  two.semantic.hit_ranges[0] = 1.5;
  two.semantic.object_ranges[0] = 1.8;
  two.semantic.visible[0] = 1;
  const ViewScore best = scorer.score(two, Category::chair);
  CHECK(best.value == doctest::Approx(4.0));
  CHECK(best.detection->distance_m == doctest::Approx(1.8));
}

TEST_CASE("scorer falls back to mean open depth when the target is not seen") {
  HeuristicScorer scorer;
  // Wrong category entirely.
  const ViewScore other =
      scorer.score(view_of(1.0, 1.3, true, {1.0, 2.0, 3.0, 0.0}), Category::sofa);
  CHECK_FALSE(other.detection.has_value());
  CHECK(other.value == doctest::Approx(2.0));  // dropouts excluded from the mean
  // Occluded instances do not count as detections.
  const ViewScore hidden =
      scorer.score(view_of(1.0, 1.3, false, {4.0, 4.0}), Category::chair);
  CHECK_FALSE(hidden.detection.has_value());
  CHECK(hidden.value == doctest::Approx(4.0));
  // A fully dropped-out view is worthless.
  const ViewScore blank =
      scorer.score(view_of(1.0, 1.3, false, {0.0, 0.0}), Category::chair);
  CHECK(blank.value == doctest::Approx(0.0));
}

TEST_CASE("detector miss knob suppresses detections reproducibly") {
  CHECK_THROWS_WITH_AS(HeuristicScorer(1.0),
                       "detector miss probability must lie in [0, 1)", Error);
  CHECK_THROWS_WITH_AS(HeuristicScorer(-0.1),
                       "detector miss probability must lie in [0, 1)", Error);

  HeuristicScorer flaky(0.5);
  flaky.reset(123);
  std::vector<bool> pattern;
  int hits = 0;
  for (int i = 0; i < 200; ++i) {
    const ViewScore s = flaky.score(view_of(1.0, 1.3, true, {2.5, 2.5}),
                                    Category::chair);
    pattern.push_back(s.detection.has_value());
    if (s.detection) {
      CHECK(s.value == doctest::Approx(5.0));
      ++hits;
    } else {
      CHECK(s.value == doctest::Approx(2.5));  // exploration fallback
    }
  }
  CHECK(hits > 65);   // binomial(200, 0.5) within 5 sigma
  CHECK(hits < 135);

  flaky.reset(123);
  for (int i = 0; i < 200; ++i) {
    const ViewScore s = flaky.score(view_of(1.0, 1.3, true, {2.5, 2.5}),
                                    Category::chair);
    CHECK(s.detection.has_value() == pattern[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("score_views indexes all twelve views and rejects short panoramas") {
  HeuristicScorer scorer;
  PanoramaNode node;
  for (int k = 0; k < kPanoramaViews; ++k) {
    node.views.push_back(view_of(1.0 + k, 1.3 + k));
  }
  const std::vector<ViewScore> scores =
      score_views(node, Category::chair, scorer);
  REQUIRE(scores.size() == 12);
  for (int k = 0; k < 12; ++k) {
    CHECK(scores[static_cast<std::size_t>(k)].view_index == k);
    CHECK(scores[static_cast<std::size_t>(k)].value ==
          doctest::Approx(10.0 / (2.0 + k)));
  }
  node.views.pop_back();
  CHECK_THROWS_WITH_AS(score_views(node, Category::chair, scorer),
                       "panorama node must hold exactly 12 views", Error);
}

TEST_CASE("select_direction takes the argmax with stable tie breaking") {
  CHECK(select_direction(score_list({1.0, 5.0, 3.0})) == 1);
  CHECK(select_direction(score_list({2.0, 2.0, 2.0})) == 0);  // lowest index
  CHECK(select_direction(score_list({})) == -1);
  // Positive affine rescaling never changes the choice.
  const std::vector<double> vals{0.4, 1.9, 1.9, 0.2, 1.4};
  std::vector<double> scaled;
  for (double v : vals) scaled.push_back(3.0 * v + 7.0);
  CHECK(select_direction(score_list(vals)) == select_direction(score_list(scaled)));

  CHECK(select_direction(score_list({1.0, 5.0, 3.0}), {false, true, false}) == 2);
  CHECK(select_direction(score_list({1.0, 5.0, 3.0}), {true, true, true}) == -1);
  // A short exclusion mask leaves the remaining views eligible.
  CHECK(select_direction(score_list({1.0, 5.0, 3.0}), {true}) == 1);
}

TEST_CASE("short-term goals project along the view heading") {
  const Vec2 up = project_short_term_goal({0.0, 0.0, 0.0}, 3);
  CHECK(up.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(up.y == doctest::Approx(1.5));

  const Vec2 ahead = project_short_term_goal({2.0, 1.0, 30.0}, 0);
  CHECK(ahead.x == doctest::Approx(2.0 + 1.5 * std::cos(deg_to_rad(30.0))));
  CHECK(ahead.y == doctest::Approx(1.75));

  const Vec2 custom = project_short_term_goal({0.0, 0.0, 0.0}, 0, 2.0);
  CHECK(custom.x == doctest::Approx(2.0));
  CHECK(custom.y == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("grid-aware projection clips the goal at the first blocked cell") {
  OccupancyGrid grid;
  grid.width = 30;
  grid.height = 10;
  grid.resolution = 0.1;
  grid.origin = {0.0, 0.0};
  grid.cells.assign(300, CellState::free);
  const Pose2D pose{0.5, 0.5, 0.0};

  SUBCASE("open ray reaches the full offset") {
    const Vec2 g = project_short_term_goal(pose, 0, grid);
    CHECK(g.x == doctest::Approx(2.0));
    CHECK(g.y == doctest::Approx(0.5));
  }
  SUBCASE("a wall truncates the ray to the last free sample") {
    for (int iy = 0; iy < 10; ++iy) grid.set(13, iy, CellState::occupied);
    const Vec2 g = project_short_term_goal(pose, 0, grid);
    CHECK(g.x == doctest::Approx(1.25));
    CHECK(g.y == doctest::Approx(0.5));
  }
  SUBCASE("an adjacent wall collapses the goal onto the pose") {
    for (int iy = 0; iy < 10; ++iy) grid.set(5, iy, CellState::occupied);
    const Vec2 g = project_short_term_goal(pose, 0, grid);
    CHECK(g.x == doctest::Approx(0.5));
    CHECK(g.y == doctest::Approx(0.5));
  }
}

TEST_CASE("extended action tokens map onto the base set") {
  const auto check = [](const std::string& token, ActionKind kind, double mag) {
    const DiscreteAction a = remap_action(token);
    CHECK(a.kind == kind);
    CHECK(a.magnitude == doctest::Approx(mag));
  };
  check("MOVE_FORWARD", ActionKind::move_forward, 0.25);
  check("MOVE_BACKWARD", ActionKind::move_backward, 0.25);
  check("TURN_LEFT", ActionKind::turn_left, 30.0);
  check("TURN_RIGHT", ActionKind::turn_right, 30.0);
  check("STOP", ActionKind::stop, 0.0);
  // The camera-pitch tokens have no planar equivalent; they nudge the base
  // instead so replayed traces keep their length.
  check("LOOK_UP", ActionKind::move_backward, 0.25);
  check("LOOK_DOWN", ActionKind::move_forward, 0.25);
  CHECK_THROWS_WITH_AS(remap_action("JUMP"), "unknown action token: 'JUMP'",
                       Error);
}

TEST_CASE("random baseline is seed-deterministic and observation-blind") {
  CHECK_THROWS_WITH_AS(RandomPolicy(1.5), "stop probability must lie in [0, 1]",
                       Error);

  RandomPolicy a, b;
  a.begin(Category::chair, 42);
  b.begin(Category::sofa, 42);  // target must not matter
  Observation obs_a, obs_b;
  obs_b.gps = {3.0, 1.0, 90.0};
  obs_b.steps_used = 77;
  for (int i = 0; i < 500; ++i) {
    CHECK(a.decide(obs_a).kind == b.decide(obs_b).kind);
  }

  RandomPolicy c;
  c.begin(Category::chair, 43);
  a.begin(Category::chair, 42);
  bool diverged = false;
  for (int i = 0; i < 500; ++i) {
    if (a.decide(obs_a).kind != c.decide(obs_a).kind) diverged = true;
  }
  CHECK(diverged);
}

TEST_CASE("random baseline action frequencies match the declared mixture") {
  RandomPolicy p;
  p.begin(Category::chair, 7);
  Observation obs;
  int stops = 0, fwd = 0, left = 0, right = 0;
  for (int i = 0; i < 10000; ++i) {
    switch (p.decide(obs).kind) {
      case ActionKind::stop: ++stops; break;
      case ActionKind::move_forward: ++fwd; break;
      case ActionKind::turn_left: ++left; break;
      case ActionKind::turn_right: ++right; break;
      default: FAIL("unexpected action kind");
    }
  }
  CHECK(stops > 144);   // binomial(1e4, 0.02) within 4 sigma
  CHECK(stops < 256);
  for (int n : {fwd, left, right}) {
    CHECK(n > 3079);    // binomial(1e4, 0.98/3) within 4 sigma
    CHECK(n < 3454);
  }
}

TEST_CASE("episode planner accumulates scans and replans around them") {
  CHECK_THROWS_WITH_AS(VlvPlanner(0.0), "planner resolution must be positive",
                       Error);

  VlvPlanner planner;
  DepthScan one_ray;
  one_ray.fov_deg = 0.0;
  one_ray.max_range = 5.0;
  one_ray.ranges = {2.0};
  planner.add_scan(one_ray, {0.0, 0.0, 0.0});
  CHECK(planner.scan_count() == 1);

  const OccupancyGrid& grid = planner.inflated();
  CHECK(grid.at(grid.cell_x(2.0), grid.cell_y(0.0)) == CellState::occupied);
  CHECK(grid.at(grid.cell_x(1.0), grid.cell_y(0.0)) == CellState::free);

  // Goal short of the obstacle: plannable through swept free space.
  const auto path = planner.plan({0.0, 0.0}, {1.0, 0.0});
  REQUIRE(path.has_value());
  REQUIRE(path->size() >= 2);
  CHECK(distance(path->back(), Vec2{1.0, 0.0}) <= planner.inflated().resolution);

  // Goal inside the inflated obstacle: unreachable, reported as nothing.
  CHECK_FALSE(planner.plan({0.0, 0.0}, {2.0, 0.0}).has_value());

  // A start swallowed by inflation is nudged to nearby free space.
  const auto nudged = planner.plan({1.9, 0.0}, {1.0, 0.0});
  REQUIRE(nudged.has_value());
  CHECK(distance(nudged->front(), Vec2{1.9, 0.0}) < 0.5);

  // New scans invalidate the cached grid.
  DepthScan side = one_ray;
  planner.add_scan(side, {0.0, 0.0, 90.0});
  CHECK(planner.scan_count() == 2);
  const OccupancyGrid& regrown = planner.inflated();
  CHECK(regrown.at(regrown.cell_x(0.0), regrown.cell_y(2.0)) ==
        CellState::occupied);
}

TEST_CASE("modular policy completes a panorama before every transit leg") {
  WorldMap room = empty_room(40, 40, 0.1);
  room.objects.push_back({Category::chair, {3.0, 2.0}, 0.3});
  const Pose2D start{1.0, 2.0, 0.0};

  VlvState state;
  state.target = Category::chair;
  VlvPlanner planner(kDefaultResolution, 0.22);
  HeuristicScorer scorer;
  scorer.reset(7);
  const VlvConfig cfg;

  Pose2D pose = start;
  std::optional<DiscreteAction> last;
  int steps = 0;
  int turns_in_node = 0;
  int goals_emitted = 0;
  int first_goal_step = -1;
  bool stopped = false;

  while (steps < 400) {
    const Observation obs = observe(room, start, pose, last);
    const VlvPhase phase_before = state.phase;
    const std::size_t views_before = state.views.size();
    const PolicyAction pa = vlv_policy_step(state, obs, planner, scorer, cfg);

    if (std::holds_alternative<ShortTermGoal>(pa)) {
      // Goals are zero-cost and only legal right after a full panorama.
      CHECK(turns_in_node == kPanoramaViews);
      CHECK(state.phase == VlvPhase::transit);
      ++goals_emitted;
      if (first_goal_step < 0) first_goal_step = steps;
      continue;  // same observation feeds the first leg action
    }

    const DiscreteAction act = std::get<DiscreteAction>(pa);
    ++steps;
    if (act.kind == ActionKind::stop) {
      stopped = true;
      break;
    }
    if (phase_before == VlvPhase::panorama) {
      CHECK(act.kind == ActionKind::turn_left);
      CHECK(act.magnitude == doctest::Approx(kPanoramaTurnDeg));
      ++turns_in_node;
      CHECK(turns_in_node <= kPanoramaViews);
    } else if (state.phase == VlvPhase::panorama) {
      // Leg exhausted: the node reopened and the panorama restarted.
      CHECK(act.kind == ActionKind::turn_left);
      turns_in_node = 1;
    } else {
      // Mid-transit: the panorama never runs and the views stay fixed.
      CHECK(state.views.size() == views_before);
    }
    pose = apply_ideal(pose, act);
    last = act;
  }

  CHECK(stopped);
  CHECK(state.stopped);
  CHECK_FALSE(state.gave_up);
  CHECK(goals_emitted >= 1);
  CHECK(first_goal_step == kPanoramaViews);  // exactly twelve turns first
  CHECK(distance_to_object(room, pose.position(), Category::chair) < 1.0);
}

TEST_CASE("a guard substitution mid-leg reopens the exploration node") {
  WorldMap room = empty_room(40, 40, 0.1);
  room.objects.push_back({Category::chair, {3.0, 2.0}, 0.3});
  const Pose2D start{1.0, 2.0, 0.0};

  VlvState state;
  state.target = Category::chair;
  VlvPlanner planner(kDefaultResolution, 0.22);
  HeuristicScorer scorer;
  scorer.reset(7);
  const VlvConfig cfg;

  Pose2D pose = start;
  std::optional<DiscreteAction> last;
  int guard_step = -1;
  for (int steps = 0; steps < 200; ++steps) {
    const Observation obs = observe(room, start, pose, last);
    const PolicyAction pa = vlv_policy_step(state, obs, planner, scorer, cfg);
    if (std::holds_alternative<ShortTermGoal>(pa)) continue;
    const DiscreteAction act = std::get<DiscreteAction>(pa);
    REQUIRE(act.kind != ActionKind::stop);
    if (state.phase == VlvPhase::transit &&
        act.kind == ActionKind::move_forward) {
      // Pretend the obstacle guard swapped the move for an avoidance turn.
      const DiscreteAction substituted = make_turn_left(30.0);
      pose = apply_ideal(pose, substituted);
      last = substituted;
      guard_step = steps;
      break;
    }
    pose = apply_ideal(pose, act);
    last = act;
  }
  REQUIRE(guard_step >= 0);

  const int node_before = state.node_id;
  const Observation obs = observe(room, start, pose, last);
  const PolicyAction pa = vlv_policy_step(state, obs, planner, scorer, cfg);
  const DiscreteAction act = std::get<DiscreteAction>(pa);
  CHECK(act.kind == ActionKind::turn_left);  // panorama restarts here
  CHECK(state.phase == VlvPhase::panorama);
  CHECK(state.node_id == node_before + 1);
}

TEST_CASE("a closet with no plannable direction makes the policy give up") {
  const WorldMap closet = empty_room(9, 9, 0.1);  // 0.7 m square interior
  const Pose2D start{0.45, 0.45, 0.0};

  VlvPolicy policy;
  policy.begin(Category::chair, 11);
  Pose2D pose = start;
  std::optional<DiscreteAction> last;
  int steps = 0;
  DiscreteAction act = make_stop();
  while (steps < 50) {
    act = policy.decide(observe(closet, start, pose, last));
    ++steps;
    if (act.kind == ActionKind::stop) break;
    pose = apply_ideal(pose, act);
    last = act;
  }
  CHECK(act.kind == ActionKind::stop);
  CHECK(steps == kPanoramaViews + 1);  // one full panorama, then surrender
  CHECK(policy.state().gave_up);
  CHECK(policy.state().stopped);
  // Once stopped it keeps stopping.
  CHECK(policy.decide(observe(closet, start, pose, last)).kind ==
        ActionKind::stop);
}

TEST_CASE("the wrapped modular policy reaches a chair through decide()") {
  WorldMap room = empty_room(40, 40, 0.1);
  room.objects.push_back({Category::chair, {3.0, 2.0}, 0.3});
  const Pose2D start{1.0, 2.0, 0.0};

  VlvPolicy policy;
  policy.begin(Category::chair, 3);
  CHECK(policy.name() == "vlv");

  Pose2D pose = start;
  std::optional<DiscreteAction> last;
  bool stopped = false;
  for (int steps = 0; steps < 400; ++steps) {
    const DiscreteAction act = policy.decide(observe(room, start, pose, last));
    if (steps < kPanoramaViews) {
      CHECK(act.kind == ActionKind::turn_left);
    }
    if (act.kind == ActionKind::stop) {
      stopped = true;
      break;
    }
    pose = apply_ideal(pose, act);
    last = act;
  }
  CHECK(stopped);
  CHECK(distance_to_object(room, pose.position(), Category::chair) < 1.0);
}

TEST_CASE("ground-truth oracle walks straight to the target and stops") {
  WorldMap room = empty_room(60, 60, 0.1);
  room.objects.push_back({Category::chair, {4.5, 3.0}, 0.3});
  const Pose2D start{1.5, 3.0, 0.0};

  OraclePolicy oracle(room, start);
  oracle.begin(Category::chair, 0);
  CHECK(oracle.name() == "oracle");

  Pose2D pose = start;
  int steps = 0;
  bool stopped = false;
  while (steps < 20) {
    const DiscreteAction act = oracle.decide(observe(room, start, pose));
    ++steps;
    if (act.kind == ActionKind::stop) {
      stopped = true;
      break;
    }
    pose = apply_ideal(pose, act);
  }
  CHECK(stopped);
  CHECK(distance_to_object(room, pose.position(), Category::chair) < 1.0);
}

TEST_CASE("oracle stops immediately inside the success radius") {
  WorldMap room = empty_room(60, 60, 0.1);
  room.objects.push_back({Category::chair, {4.5, 3.0}, 0.3});
  const Pose2D start{3.7, 3.0, 0.0};
  OraclePolicy oracle(room, start);
  oracle.begin(Category::chair, 0);
  CHECK(oracle.decide(observe(room, start, start)).kind == ActionKind::stop);
}

TEST_CASE("oracle reports unreachable and absent targets loudly") {
  WorldMap room = empty_room(60, 60, 0.1);
  for (int iy = 0; iy < 60; ++iy) room.grid.set(30, iy, true);  // sealing wall
  room.objects.push_back({Category::chair, {4.5, 3.0}, 0.3});
  const Pose2D start{1.5, 3.0, 0.0};
  OraclePolicy oracle(room, start);

  CHECK_THROWS_WITH_AS(oracle.begin(Category::bed, 0),
                       "oracle target category 'bed' is absent from the world",
                       Error);
  oracle.begin(Category::chair, 0);
  CHECK_THROWS_WITH_AS(oracle.decide(observe(room, start, start)),
                       "no reachable approach to the target instance", Error);
}

TEST_CASE("live panorama capture turns a full circle on the bus") {
  WorldMap world = empty_room(220, 220, 0.1);
  const Pose2D start{11.0, 11.0, 0.0};
  auto clock = std::make_shared<SimClock>();
  Scheduler sched(clock);
  Bus bus(clock);
  SimWorld sim(world, RobotState{start, 0.18}, NoiseModel{});
  RobotApiNode robot(bus, sched, sim, RobotConfig{});
  CameraApiNode camera(bus, sched, sim, CameraConfig{});
  DiscreteMoveNode move(bus, sched, MotionConfig{});

  const PanoramaNode node = capture_panorama(bus, sched, start, 4);
  CHECK(node.node_id == 4);
  REQUIRE(node.views.size() == kPanoramaViews);
  for (std::size_t k = 1; k < node.views.size(); ++k) {
    CHECK(node.views[k].depth.stamp > node.views[k - 1].depth.stamp);
    CHECK(node.views[k].semantic.stamp == node.views[k].depth.stamp);
  }
  // Twelve 30 degree lefts return the plant to its opening heading.
  CHECK(std::fabs(signed_deg(sim.pose().heading_deg - start.heading_deg)) < 3.0);
}

TEST_CASE("panorama capture surfaces a missing motion service") {
  WorldMap world = empty_room(220, 220, 0.1);
  const Pose2D start{11.0, 11.0, 0.0};
  auto clock = std::make_shared<SimClock>();
  Scheduler sched(clock);
  Bus bus(clock);
  SimWorld sim(world, RobotState{start, 0.18}, NoiseModel{});
  CameraApiNode camera(bus, sched, sim, CameraConfig{});  // camera, no mover
  CHECK_THROWS_WITH_AS(capture_panorama(bus, sched, start),
                       "panorama turn: unknown_service", Error);
}

TEST_CASE("policy registry builds the stock policies and accepts new ones") {
  WorldMap room = empty_room(60, 60, 0.1);
  room.objects.push_back({Category::chair, {4.5, 3.0}, 0.3});
  PolicyContext ctx;
  ctx.world = &room;
  ctx.start_pose = {1.5, 3.0, 0.0};

  const std::vector<std::string> names = policy_names();
  for (const char* expected : {"oracle", "random", "vlv"}) {
    CHECK(std::find(names.begin(), names.end(), expected) != names.end());
  }
  CHECK(make_policy("vlv", ctx)->name() == "vlv");
  CHECK(make_policy("random", ctx)->name() == "random");
  CHECK(make_policy("oracle", ctx)->name() == "oracle");

  PolicyContext blind;
  CHECK_THROWS_WITH_AS(make_policy("oracle", blind),
                       "oracle policy needs ground-truth world access", Error);
  CHECK_THROWS_WITH_AS(make_policy("nope", ctx),
                       "unknown policy 'nope' (known: oracle, random, vlv)",
                       Error);

  register_policy("custom", [](const PolicyContext&) {
    return std::make_unique<RandomPolicy>(0.5);
  });
  CHECK(make_policy("custom", ctx)->name() == "random");
  const std::vector<std::string> grown = policy_names();
  CHECK(std::find(grown.begin(), grown.end(), "custom") != grown.end());
}
