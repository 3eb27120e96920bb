#include "navstack/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace navstack {

HeuristicScorer::HeuristicScorer(double miss_probability)
    : miss_probability_(miss_probability), rng_(0) {
  if (miss_probability < 0.0 || miss_probability >= 1.0) {
    throw Error("detector miss probability must lie in [0, 1)");
  }
}

void HeuristicScorer::reset(unsigned long long seed) {
  rng_ = Rng(mix_seed(seed, 0x5c03e5ULL));
}

ViewScore HeuristicScorer::score(const FramePair& view, Category target) {
  ViewScore out;
  const SemanticScan& sem = view.semantic;
  double best_hit = std::numeric_limits<double>::infinity();
  double centroid_range = 0.0;
  for (std::size_t i = 0; i < sem.labels.size(); ++i) {
    if (!label_matches(sem.labels[i], target)) continue;
    if (i < sem.visible.size() && !sem.visible[i]) continue;
    if (sem.hit_ranges[i] < best_hit) {
      best_hit = sem.hit_ranges[i];
      centroid_range = sem.object_ranges[i];
    }
  }
  const bool seen = std::isfinite(best_hit) &&
                    !(miss_probability_ > 0.0 && rng_.uniform() < miss_probability_);
  if (seen) {
    out.value = 10.0 / (1.0 + best_hit);
    // The stop rule compares this against the success radius, which is
    // measured to the instance centroid, so the detection carries the
    // centroid range rather than the surface hit.
    out.detection = Detection{target, centroid_range, 1.0};
    return out;
  }
  // Exploration term: prefer the most open view.
  double sum = 0.0;
  int count = 0;
  for (double r : view.depth.ranges) {
    if (r > 0.0) {
      sum += r;
      ++count;
    }
  }
  out.value = count > 0 ? sum / count : 0.0;
  return out;
}

PanoramaNode capture_panorama(Bus& bus, Scheduler& sched, const Pose2D& pose,
                              int node_id, double timeout_s) {
  PanoramaNode node;
  node.pose = pose;
  node.node_id = node_id;
  for (int k = 0; k < kPanoramaViews; ++k) {
    std::vector<FramePair> frames =
        await_fresh_frames(bus, sched, 1, "panorama", timeout_s);
    node.views.push_back(frames.back());
    const CallResult reply =
        bus.call("/discrete_move", ServiceRequest{make_turn_left(kPanoramaTurnDeg)},
                 timeout_s);
    if (reply.status != CallStatus::ok) {
      throw Error(std::string("panorama turn: ") + to_string(reply.status));
    }
    const MoveResult& mr = std::get<MoveResult>(reply.response);
    if (!mr.success) {
      throw Error("panorama turn failed: " + mr.error);
    }
  }
  return node;
}

std::vector<ViewScore> score_views(const PanoramaNode& node, Category target,
                                   ViewScorer& scorer) {
  if (static_cast<int>(node.views.size()) != kPanoramaViews) {
    throw Error("panorama node must hold exactly 12 views");
  }
  std::vector<ViewScore> scores;
  scores.reserve(node.views.size());
  for (std::size_t k = 0; k < node.views.size(); ++k) {
    ViewScore s = scorer.score(node.views[k], target);
    s.view_index = static_cast<int>(k);
    scores.push_back(s);
  }
  return scores;
}

int select_direction(const std::vector<ViewScore>& scores) {
  return select_direction(scores, std::vector<bool>(scores.size(), false));
}

int select_direction(const std::vector<ViewScore>& scores,
                     const std::vector<bool>& excluded) {
  int best = -1;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (k < excluded.size() && excluded[k]) continue;
    if (best < 0 || scores[k].value > scores[static_cast<std::size_t>(best)].value) {
      best = static_cast<int>(k);
    }
  }
  return best;
}

Vec2 project_short_term_goal(const Pose2D& pose, int view_index,
                             double offset_m) {
  const double heading = pose.heading_deg + view_index * kPanoramaTurnDeg;
  return pose.position() + heading_dir(heading) * offset_m;
}

Vec2 project_short_term_goal(const Pose2D& pose, int view_index,
                             const OccupancyGrid& grid, double offset_m) {
  const double heading = pose.heading_deg + view_index * kPanoramaTurnDeg;
  const Vec2 dir = heading_dir(heading);
  const double step = grid.resolution * 0.5;
  Vec2 best = pose.position();
  for (double t = step; t < offset_m + step * 0.5; t += step) {
    const double d = std::min(t, offset_m);
    const Vec2 p = pose.position() + dir * d;
    if (grid.at(grid.cell_x(p.x), grid.cell_y(p.y)) == CellState::occupied) {
      break;
    }
    best = p;
  }
  return best;
}

DiscreteAction remap_action(const std::string& token) {
  if (token == "MOVE_FORWARD") return make_move_forward(0.25);
  if (token == "MOVE_BACKWARD") return make_move_backward(0.25);
  if (token == "TURN_LEFT") return make_turn_left(30.0);
  if (token == "TURN_RIGHT") return make_turn_right(30.0);
  if (token == "STOP") return make_stop();
  if (token == "LOOK_UP") return make_move_backward(0.25);
  if (token == "LOOK_DOWN") return make_move_forward(0.25);
  throw Error("unknown action token: '" + token + "'");
}

VlvPlanner::VlvPlanner(double resolution, double inflate_radius)
    : resolution_(resolution), inflate_radius_(inflate_radius) {
  if (resolution <= 0.0) throw Error("planner resolution must be positive");
}

void VlvPlanner::add_scan(const DepthScan& depth, const Pose2D& pose) {
  scans_.emplace_back(depth, pose);
  cache_.reset();
}

const OccupancyGrid& VlvPlanner::inflated() const {
  if (!cache_) {
    cache_ = inflate(build_occupancy(scans_, resolution_), inflate_radius_);
  }
  return *cache_;
}

namespace {

// Nearest non-occupied cell center within a small ring search; used to nudge
// a pose that inflation swallowed back into plannable space.
std::optional<Vec2> nearest_free_center(const OccupancyGrid& grid, const Vec2& p,
                                        int max_ring = 8) {
  const int ix = grid.cell_x(p.x);
  const int iy = grid.cell_y(p.y);
  if (grid.at(ix, iy) != CellState::occupied) return p;
  double best_d = std::numeric_limits<double>::infinity();
  std::optional<Vec2> best;
  for (int ring = 1; ring <= max_ring; ++ring) {
    for (int dy = -ring; dy <= ring; ++dy) {
      for (int dx = -ring; dx <= ring; ++dx) {
        if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
        if (grid.at(ix + dx, iy + dy) == CellState::occupied) continue;
        const Vec2 c = grid.center(ix + dx, iy + dy);
        const double d = distance(c, p);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
    }
    if (best) return best;
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::vector<Vec2>> VlvPlanner::plan(const Vec2& from,
                                                  const Vec2& goal) const {
  const OccupancyGrid& grid = inflated();
  std::optional<Vec2> start = nearest_free_center(grid, from);
  if (!start) return std::nullopt;
  try {
    DistanceField field = fast_marching(grid, goal);
    return extract_path(field, grid, *start);
  } catch (const Error&) {
    return std::nullopt;
  }
}

namespace {

// Opens a node anchored at the current observation, which becomes view 0.
void open_node(VlvState& state, const Observation& obs, bool first) {
  if (!first) ++state.node_id;
  state.phase = VlvPhase::panorama;
  state.views.clear();
  state.scores.clear();
  state.excluded.clear();
  state.leg.clear();
  state.leg_next = 0;
  state.goal.reset();
  state.node_pose = obs.gps;
  state.views.push_back(FramePair{obs.semantic, obs.depth});
}

DiscreteAction returned(VlvState& state, DiscreteAction a) {
  state.last_returned = a;
  return a;
}

}  // namespace

PolicyAction vlv_policy_step(VlvState& state, const Observation& obs,
                             VlvPlanner& planner, ViewScorer& scorer,
                             const VlvConfig& cfg) {
  planner.add_scan(obs.depth, obs.gps);
  if (state.stopped) return returned(state, make_stop());

  if (state.phase == VlvPhase::transit) {
    // A guard substitution means the leg went off-plan; reopen a node here.
    const bool substituted = obs.last_action && state.last_returned &&
                             obs.last_action->kind != state.last_returned->kind;
    if (!substituted && state.leg_next < state.leg.size()) {
      return returned(state, state.leg[state.leg_next++]);
    }
    open_node(state, obs, false);
    return returned(state, make_turn_left(kPanoramaTurnDeg));
  }

  // Panorama phase: collect 12 views, turning 30 degrees after each so the
  // 12th turn restores the opening heading.
  if (static_cast<int>(state.views.size()) < kPanoramaViews) {
    if (state.views.empty()) {
      open_node(state, obs, /*first=*/true);  // episode's first observation
    } else {
      state.views.push_back(FramePair{obs.semantic, obs.depth});
    }
    return returned(state, make_turn_left(kPanoramaTurnDeg));
  }

  if (state.scores.empty()) {
    PanoramaNode node{state.views, state.node_pose, state.node_id};
    state.scores = score_views(node, state.target, scorer);
    state.excluded.assign(state.scores.size(), false);
  }

  for (;;) {
    const int k = select_direction(state.scores, state.excluded);
    if (k < 0) {
      state.gave_up = true;
      state.stopped = true;
      return returned(state, make_stop());
    }
    const ViewScore& s = state.scores[static_cast<std::size_t>(k)];
    if (s.detection && s.detection->distance_m < cfg.stop_distance_m) {
      state.stopped = true;
      return returned(state, make_stop());
    }
    const Vec2 goal = project_short_term_goal(state.node_pose, k,
                                              planner.inflated(),
                                              cfg.goal_offset_m);
    if (distance(goal, obs.gps.position()) < cfg.arrive_tol_m) {
      state.excluded[static_cast<std::size_t>(k)] = true;  // degenerate leg
      continue;
    }
    std::optional<std::vector<Vec2>> path = planner.plan(obs.gps.position(), goal);
    if (!path || path->size() < 2) {
      state.excluded[static_cast<std::size_t>(k)] = true;
      continue;
    }
    state.leg = path_to_actions(*path, obs.gps, cfg.step_m, cfg.turn_deg);
    if (state.leg.empty()) {
      state.excluded[static_cast<std::size_t>(k)] = true;
      continue;
    }
    state.leg_next = 0;
    state.goal = goal;
    state.phase = VlvPhase::transit;
    return ShortTermGoal{goal};
  }
}

VlvPolicy::VlvPolicy(std::shared_ptr<ViewScorer> scorer, VlvConfig cfg)
    : scorer_(scorer ? std::move(scorer) : std::make_shared<HeuristicScorer>()),
      cfg_(cfg),
      planner_(cfg.resolution, cfg.inflate_radius_m) {}

void VlvPolicy::begin(Category target, unsigned long long seed) {
  state_ = VlvState{};
  state_.target = target;
  planner_ = VlvPlanner(cfg_.resolution, cfg_.inflate_radius_m);
  scorer_->reset(mix_seed(seed, 0x71f0ULL));
}

DiscreteAction VlvPolicy::decide(const Observation& obs) {
  for (int i = 0; i < 3; ++i) {
    PolicyAction pa = vlv_policy_step(state_, obs, planner_, *scorer_, cfg_);
    if (const auto* act = std::get_if<DiscreteAction>(&pa)) return *act;
    // A ShortTermGoal costs no action; step again for the first leg action.
  }
  throw Error("modular policy failed to produce a discrete action");
}

namespace {

// Conservative rasterization of the true world: a cell is occupied when its
// center lies within half a cell diagonal of a wall cell or object disc.
OccupancyGrid rasterize_world(const WorldMap& world, double resolution) {
  OccupancyGrid g;
  const double extent_x = world.grid.width * world.grid.resolution;
  const double extent_y = world.grid.height * world.grid.resolution;
  g.width = static_cast<int>(std::ceil(extent_x / resolution));
  g.height = static_cast<int>(std::ceil(extent_y / resolution));
  g.resolution = resolution;
  g.origin = Vec2{0.0, 0.0};
  g.cells.assign(static_cast<std::size_t>(g.width) * g.height, CellState::free);
  for (int iy = 0; iy < g.height; ++iy) {
    for (int ix = 0; ix < g.width; ++ix) {
      const Vec2 c = g.center(ix, iy);
      if (world.grid.occupied(world.grid.cell_x(c.x), world.grid.cell_y(c.y))) {
        g.set(ix, iy, CellState::occupied);
      }
    }
  }
  const double pad = 0.5 * g.resolution * std::sqrt(2.0);
  for (const ObjectInstance& obj : world.objects) {
    const double r = obj.radius + pad;
    const int x0 = g.cell_x(obj.centroid.x - r);
    const int x1 = g.cell_x(obj.centroid.x + r);
    const int y0 = g.cell_y(obj.centroid.y - r);
    const int y1 = g.cell_y(obj.centroid.y + r);
    for (int iy = y0; iy <= y1; ++iy) {
      for (int ix = x0; ix <= x1; ++ix) {
        if (!g.in_bounds(ix, iy)) continue;
        if (distance(g.center(ix, iy), obj.centroid) <= r) {
          g.set(ix, iy, CellState::occupied);
        }
      }
    }
  }
  return g;
}

}  // namespace

OraclePolicy::OraclePolicy(const WorldMap& world, const Pose2D& start_pose,
                           OracleConfig cfg)
    : world_(world),
      start_(start_pose),
      cfg_(cfg),
      grid_(inflate(rasterize_world(world, cfg.resolution),
                    cfg.inflate_radius_m)) {}

void OraclePolicy::begin(Category target, unsigned long long seed) {
  (void)seed;
  if (!world_.has_category(target)) {
    throw Error("oracle target category '" + std::string(to_string(target)) +
                "' is absent from the world");
  }
  target_ = target;
}

std::vector<Vec2> OraclePolicy::plan_from(const Vec2& pos) const {
  std::optional<Vec2> from = nearest_free_center(grid_, pos);
  if (!from) throw Error("robot pose is deep inside inflated space");
  // Field rooted at the robot: every finite cell is provably reachable, so
  // goal selection cannot pick an approach cell in a sealed pocket.
  DistanceField field = fast_marching(grid_, *from);
  double best_d = std::numeric_limits<double>::infinity();
  Vec2 goal{};
  for (int iy = 0; iy < grid_.height; ++iy) {
    for (int ix = 0; ix < grid_.width; ++ix) {
      if (grid_.at(ix, iy) == CellState::occupied) continue;
      if (!std::isfinite(field.at(ix, iy))) continue;
      const Vec2 center = grid_.center(ix, iy);
      for (const ObjectInstance& obj : world_.objects) {
        if (obj.category != target_) continue;
        const double d = distance(center, obj.centroid);
        if (d < best_d) {
          best_d = d;
          goal = center;
        }
      }
    }
  }
  if (best_d >= cfg_.stop_distance_m) {
    throw Error("no reachable approach to the target instance");
  }
  std::vector<Vec2> path = extract_path(field, grid_, goal);
  std::reverse(path.begin(), path.end());
  return path;
}

DiscreteAction OraclePolicy::aim_at(const Vec2& point, const Pose2D& pose) const {
  const double bearing =
      rad_to_deg(std::atan2(point.y - pose.y, point.x - pose.x));
  const double err = signed_deg(normalize_deg(bearing - pose.heading_deg));
  if (std::fabs(err) > cfg_.turn_deg / 2.0) {
    return err > 0.0 ? make_turn_left(cfg_.turn_deg)
                     : make_turn_right(cfg_.turn_deg);
  }
  return make_move_forward(cfg_.step_m);
}

DiscreteAction OraclePolicy::decide(const Observation& obs) {
  const Pose2D pose = compose(start_, obs.gps);
  if (distance_to_object(world_, pose.position(), target_) <
      cfg_.stop_distance_m) {
    return make_stop();
  }
  std::vector<Vec2> path = plan_from(pose.position());
  PathFollower follower(path, cfg_.step_m, cfg_.turn_deg, cfg_.arrive_tol_m);
  std::optional<DiscreteAction> act = follower.next_action(pose);
  if (act) return *act;
  // Arrived at the best plannable cell but still outside the stop radius:
  // close the residual directly.
  const ObjectInstance* nearest = nullptr;
  double nearest_d = std::numeric_limits<double>::infinity();
  for (const ObjectInstance& obj : world_.objects) {
    if (obj.category != target_) continue;
    const double d = distance(obj.centroid, pose.position());
    if (d < nearest_d) {
      nearest_d = d;
      nearest = &obj;
    }
  }
  if (!nearest) throw Error("no reachable target instance");
  return aim_at(nearest->centroid, pose);
}

RandomPolicy::RandomPolicy(double stop_probability)
    : stop_probability_(stop_probability), rng_(0) {
  if (stop_probability < 0.0 || stop_probability > 1.0) {
    throw Error("stop probability must lie in [0, 1]");
  }
}

void RandomPolicy::begin(Category target, unsigned long long seed) {
  (void)target;
  rng_ = Rng(mix_seed(seed, 0x9a7d0bULL));
}

DiscreteAction RandomPolicy::decide(const Observation& obs) {
  (void)obs;
  if (rng_.uniform() < stop_probability_) return make_stop();
  switch (rng_.uniform_int(3)) {
    case 0: return make_move_forward(0.25);
    case 1: return make_turn_left(30.0);
    default: return make_turn_right(30.0);
  }
}

namespace {

std::mutex& registry_mutex() {
  static std::mutex mu;
  return mu;
}

std::map<std::string, PolicyFactory>& registry() {
  static std::map<std::string, PolicyFactory> reg = [] {
    std::map<std::string, PolicyFactory> r;
    r["vlv"] = [](const PolicyContext& ctx) -> std::unique_ptr<Policy> {
      auto scorer =
          std::make_shared<HeuristicScorer>(ctx.scorer_miss_probability);
      return std::make_unique<VlvPolicy>(scorer);
    };
    r["random"] = [](const PolicyContext&) -> std::unique_ptr<Policy> {
      return std::make_unique<RandomPolicy>();
    };
    r["oracle"] = [](const PolicyContext& ctx) -> std::unique_ptr<Policy> {
      if (!ctx.world) {
        throw Error("oracle policy needs ground-truth world access");
      }
      return std::make_unique<OraclePolicy>(*ctx.world, ctx.start_pose);
    };
    return r;
  }();
  return reg;
}

}  // namespace

void register_policy(const std::string& name, PolicyFactory factory) {
  std::lock_guard<std::mutex> lk(registry_mutex());
  registry()[name] = std::move(factory);
}

std::unique_ptr<Policy> make_policy(const std::string& name,
                                    const PolicyContext& ctx) {
  PolicyFactory factory;
  {
    std::lock_guard<std::mutex> lk(registry_mutex());
    auto it = registry().find(name);
    if (it == registry().end()) {
      std::string known;
      for (const auto& [n, f] : registry()) {
        if (!known.empty()) known += ", ";
        known += n;
      }
      throw Error("unknown policy '" + name + "' (known: " + known + ")");
    }
    factory = it->second;
  }
  return factory(ctx);
}

std::vector<std::string> policy_names() {
  std::lock_guard<std::mutex> lk(registry_mutex());
  std::vector<std::string> names;
  for (const auto& [n, f] : registry()) names.push_back(n);
  return names;
}

}  // namespace navstack
