#include "navstack/vsn_core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace navstack {

DepthScan median_filter(const std::vector<DepthScan>& frames) {
  if (frames.empty()) throw Error("median filter needs at least one frame");
  const std::size_t n = frames.front().ranges.size();
  for (const DepthScan& f : frames) {
    if (f.ranges.size() != n || f.fov_deg != frames.front().fov_deg) {
      throw Error("median filter frames have mismatched scan shapes");
    }
  }
  DepthScan out = frames.front();
  std::size_t newest = 0;
  for (std::size_t k = 1; k < frames.size(); ++k) {
    if (frames[k].stamp >= frames[newest].stamp) newest = k;
  }
  out.stamp = frames[newest].stamp;
  out.pose_hint = frames[newest].pose_hint;
  std::vector<double> vals;
  vals.reserve(frames.size());
  for (std::size_t i = 0; i < n; ++i) {
    vals.clear();
    for (const DepthScan& f : frames) {
      if (f.ranges[i] > 0.0) vals.push_back(f.ranges[i]);
    }
    if (vals.empty()) {
      out.ranges[i] = 0.0;  // dropout on every frame
      continue;
    }
    std::sort(vals.begin(), vals.end());
    // Lower median: the result is always one of the observed readings.
    out.ranges[i] = vals[(vals.size() - 1) / 2];
  }
  return out;
}

Pose2D relative_odom(const OdomSample& current, const OdomSample& start) {
  Pose2D c{current.x, current.y, current.heading_deg};
  Pose2D s{start.x, start.y, start.heading_deg};
  return relative_to(c, s);
}

bool obstacle_guard(const DepthScan& depth, double threshold_m,
                    double cone_deg) {
  const int n = static_cast<int>(depth.ranges.size());
  if (n == 0) return false;
  const double step = depth.fov_deg / static_cast<double>(n);
  const double half = cone_deg / 2.0;
  for (int i = 0; i < n; ++i) {
    const double offset = -depth.fov_deg / 2.0 + step * static_cast<double>(i);
    if (std::fabs(offset) > half) continue;
    const double r = depth.ranges[static_cast<std::size_t>(i)];
    if (r > 0.0 && r < threshold_m) return true;
  }
  return false;
}

namespace {

int config_int(const ConfigFile& file, const std::string& key, int fallback) {
  if (!file.has(key)) return fallback;
  const int v = file.get_int(key, fallback);
  if (v <= 0) throw Error("config key '" + key + "' must be positive");
  return v;
}

double config_positive(const ConfigFile& file, const std::string& key,
                       double fallback) {
  if (!file.has(key)) return fallback;
  const double v = file.get_double(key, fallback);
  if (v <= 0.0) throw Error("config key '" + key + "' must be positive");
  return v;
}

}  // namespace

VsnConfig vsn_config_from(const ConfigFile& file) {
  VsnConfig cfg;
  if (file.has("vsn.target")) {
    cfg.target = category_from_string(file.get_string("vsn.target", ""));
  }
  cfg.median_window = config_int(file, "vsn.median_window", cfg.median_window);
  if (cfg.median_window % 2 == 0) {
    throw Error("vsn.median_window must be odd, got " +
                std::to_string(cfg.median_window));
  }
  cfg.max_steps = config_int(file, "vsn.max_steps", cfg.max_steps);
  cfg.obstacle_threshold_m =
      config_positive(file, "vsn.obstacle_threshold_m", cfg.obstacle_threshold_m);
  cfg.obstacle_cone_deg =
      config_positive(file, "vsn.obstacle_cone_deg", cfg.obstacle_cone_deg);
  cfg.service_timeout_s =
      config_positive(file, "vsn.service_timeout_s", cfg.service_timeout_s);
  if (file.has("vsn.store_frames")) {
    cfg.store_frames = file.get_bool("vsn.store_frames", false);
  }
  return cfg;
}

VsnConfig load_vsn_config(const std::string& path) {
  return vsn_config_from(ConfigFile::load(path));
}

const char* to_string(EpisodeStatus s) {
  switch (s) {
    case EpisodeStatus::running: return "running";
    case EpisodeStatus::success_claimed: return "success_claimed";
    case EpisodeStatus::limit_reached: return "limit_reached";
    case EpisodeStatus::move_failed: return "move_failed";
    case EpisodeStatus::collision: return "collision";
  }
  return "?";
}

EpisodeStatus episode_status_from_string(const std::string& s) {
  for (EpisodeStatus v :
       {EpisodeStatus::running, EpisodeStatus::success_claimed,
        EpisodeStatus::limit_reached, EpisodeStatus::move_failed,
        EpisodeStatus::collision}) {
    if (s == to_string(v)) return v;
  }
  throw Error("unknown episode status: '" + s + "'");
}

std::vector<FramePair> await_fresh_frames(Bus& bus, Scheduler& sched,
                                          int count, const std::string& node,
                                          double timeout_s) {
  if (count < 1) throw Error("frame count must be >= 1");
  SubscriptionPtr color =
      bus.subscribe("/camera/color", static_cast<std::size_t>(count) * 4, node);
  SubscriptionPtr depth =
      bus.subscribe("/camera/depth", static_cast<std::size_t>(count) * 4, node);
  const double entry = bus.clock()->now();
  const double deadline = entry + timeout_s;
  std::map<double, SemanticScan> colors;
  std::map<double, DepthScan> depths;
  for (;;) {
    for (const Envelope& env : color->drain()) {
      const auto& s = std::get<SemanticScan>(env.payload);
      if (s.stamp >= entry) colors[s.stamp] = s;
    }
    for (const Envelope& env : depth->drain()) {
      const auto& s = std::get<DepthScan>(env.payload);
      if (s.stamp >= entry) depths[s.stamp] = s;
    }
    std::vector<FramePair> pairs;
    for (const auto& [stamp, scan] : colors) {
      auto it = depths.find(stamp);
      if (it == depths.end()) continue;
      pairs.push_back(FramePair{scan, it->second});
    }
    if (static_cast<int>(pairs.size()) >= count) {
      pairs.resize(static_cast<std::size_t>(count));
      return pairs;
    }
    if (bus.clock()->now() >= deadline) {
      throw Error("no fresh camera frames within " +
                  std::to_string(timeout_s) + " s");
    }
    sched.run_for(0.02);
  }
}

ActionExecutor::ActionExecutor(Bus& bus, const VsnConfig& cfg)
    : bus_(bus), cfg_(cfg) {}

StepRecord ActionExecutor::execute(const DiscreteAction& intended,
                                   const DepthScan& depth, int index) {
  StepRecord rec;
  rec.index = index;
  rec.intended = intended;
  rec.executed = intended;
  if (intended.kind == ActionKind::move_forward &&
      obstacle_guard(depth, cfg_.obstacle_threshold_m, cfg_.obstacle_cone_deg)) {
    rec.executed = make_turn_left(30.0);
    rec.guard_triggered = true;
  }
  rec.call_stamp = bus_.clock()->now();
  const CallResult reply = bus_.call(
      "/discrete_move", ServiceRequest{rec.executed}, cfg_.service_timeout_s);
  if (reply.status == CallStatus::ok) {
    rec.result = std::get<MoveResult>(reply.response);
  } else {
    rec.result.success = false;
    rec.result.error =
        std::string("discrete move service: ") + to_string(reply.status);
  }
  rec.stamp = bus_.clock()->now();
  return rec;
}

EpisodeRunner::EpisodeRunner(Bus& bus, Scheduler& sched, const VsnConfig& cfg)
    : bus_(bus), sched_(sched), cfg_(cfg), exec_(bus, cfg) {
  odom_sub_ = bus_.subscribe("/odom", 256, "vsn_core");
  color_sub_ = bus_.subscribe("/camera/color", 64, "vsn_core");
  depth_sub_ = bus_.subscribe("/camera/depth", 64, "vsn_core");
}

Observation EpisodeRunner::sense() {
  const double entry = bus_.clock()->now();
  const double deadline = entry + 60.0;
  std::map<double, SemanticScan> colors;
  std::map<double, DepthScan> depths;
  std::vector<FramePair> pairs;
  for (;;) {
    for (const Envelope& env : odom_sub_->drain()) {
      const auto& s = std::get<OdomSample>(env.payload);
      if (!last_odom_ || s.stamp >= last_odom_->stamp) last_odom_ = s;
    }
    for (const Envelope& env : color_sub_->drain()) {
      const auto& s = std::get<SemanticScan>(env.payload);
      if (s.stamp >= entry) colors[s.stamp] = s;
    }
    for (const Envelope& env : depth_sub_->drain()) {
      const auto& s = std::get<DepthScan>(env.payload);
      if (s.stamp >= entry) depths[s.stamp] = s;
    }
    pairs.clear();
    for (const auto& [stamp, scan] : colors) {
      auto it = depths.find(stamp);
      if (it == depths.end()) continue;
      pairs.push_back(FramePair{scan, it->second});
    }
    if (static_cast<int>(pairs.size()) >= cfg_.median_window && last_odom_) {
      pairs.resize(static_cast<std::size_t>(cfg_.median_window));
      break;
    }
    if (bus_.clock()->now() >= deadline) {
      throw Error("sensor capture stalled: no fresh camera frames");
    }
    sched_.run_for(0.02);
  }
  Observation obs;
  obs.semantic = pairs.back().semantic;
  std::vector<DepthScan> frames;
  frames.reserve(pairs.size());
  for (const FramePair& p : pairs) frames.push_back(p.depth);
  obs.depth = median_filter(frames);
  if (!origin_) {
    origin_ = last_odom_;
    obs.gps = Pose2D{0.0, 0.0, 0.0};  // exact zeros on the first observation
  } else {
    obs.gps = relative_odom(*last_odom_, *origin_);
  }
  obs.compass_deg = obs.gps.heading_deg;
  return obs;
}

EpisodeLog EpisodeRunner::run(Policy& policy, Category target,
                              unsigned long long seed) {
  EpisodeLog log;
  log.target = target;
  log.policy = policy.name();
  log.seed = seed;
  policy.begin(target, seed);
  origin_.reset();
  last_odom_.reset();
  const double t0 = bus_.clock()->now();
  std::optional<DiscreteAction> last_action;
  if (truth_pose) log.truth_trail.push_back(truth_pose());
  while (static_cast<int>(log.actions.size()) < cfg_.max_steps) {
    Observation obs;
    DiscreteAction intended;
    try {
      obs = sense();
      obs.steps_used = static_cast<int>(log.actions.size());
      obs.steps_left = cfg_.max_steps - obs.steps_used;
      obs.last_action = last_action;
      intended = policy.decide(obs);
    } catch (const Error&) {
      log.status = EpisodeStatus::move_failed;  // capture or policy fault
      break;
    }
    StepRecord sr =
        exec_.execute(intended, obs.depth, static_cast<int>(log.actions.size()));
    if (cfg_.store_frames) {
      sr.depth_frame = obs.depth;
      sr.semantic_frame = obs.semantic;
    }
    if (!last_odom_ || sr.result.final_odom.stamp >= last_odom_->stamp) {
      last_odom_ = sr.result.final_odom;
    }
    if (origin_) sr.odom_pose = relative_odom(*last_odom_, *origin_);
    const bool is_move = sr.executed.kind == ActionKind::move_forward ||
                         sr.executed.kind == ActionKind::move_backward;
    if (is_move) {
      const double dx = sr.result.final_odom.x - sr.result.start_odom.x;
      const double dy = sr.result.final_odom.y - sr.result.start_odom.y;
      log.total_path_length_m += std::hypot(dx, dy);
    }
    log.odom_trail.push_back(sr.odom_pose);
    if (truth_pose) log.truth_trail.push_back(truth_pose());
    last_action = sr.executed;
    const ActionKind kind = sr.executed.kind;
    const bool ok = sr.result.success;
    const bool hit = sr.result.collision;
    log.actions.push_back(std::move(sr));
    if (kind == ActionKind::stop) {
      log.status = EpisodeStatus::success_claimed;
      break;
    }
    if (!ok) {
      log.status = hit ? EpisodeStatus::collision : EpisodeStatus::move_failed;
      break;
    }
  }
  if (log.status == EpisodeStatus::running) {
    log.status = EpisodeStatus::limit_reached;
  }
  log.total_sim_time_s = bus_.clock()->now() - t0;
  return log;
}

}  // namespace navstack
