#include "navstack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "navstack/rng.hpp"
#include "navstack/svg_plot.hpp"

namespace navstack {

namespace {

constexpr int kActionBudget = 150;

using nlohmann::json;

ActionKind action_kind_from_string(const std::string& s) {
  for (ActionKind k : {ActionKind::move_forward, ActionKind::move_backward,
                       ActionKind::turn_left, ActionKind::turn_right,
                       ActionKind::stop}) {
    if (s == to_string(k)) return k;
  }
  throw Error("unknown action kind: '" + s + "'");
}

json pose_to_json(const Pose2D& p) { return json::array({p.x, p.y, p.heading_deg}); }

Pose2D pose_from_json(const json& j) {
  return Pose2D{j.at(0).get<double>(), j.at(1).get<double>(),
                j.at(2).get<double>()};
}

json action_to_json(const DiscreteAction& a) {
  return json{{"kind", to_string(a.kind)}, {"magnitude", a.magnitude}};
}

DiscreteAction action_from_json(const json& j) {
  return DiscreteAction{action_kind_from_string(j.at("kind").get<std::string>()),
                        j.at("magnitude").get<double>()};
}

json odom_to_json(const OdomSample& s) {
  return json{{"x", s.x},         {"y", s.y},
              {"heading_deg", s.heading_deg}, {"stamp", s.stamp},
              {"seq", s.seq},     {"collision", s.collision}};
}

OdomSample odom_from_json(const json& j) {
  OdomSample s;
  s.x = j.at("x").get<double>();
  s.y = j.at("y").get<double>();
  s.heading_deg = j.at("heading_deg").get<double>();
  s.stamp = j.at("stamp").get<double>();
  s.seq = j.at("seq").get<std::uint64_t>();
  s.collision = j.at("collision").get<bool>();
  return s;
}

json result_to_json(const MoveResult& r) {
  return json{{"success", r.success},
              {"final_turn_error_deg", r.final_turn_error_deg},
              {"final_straight_error_m", r.final_straight_error_m},
              {"elapsed_s", r.elapsed_s},
              {"collision", r.collision},
              {"error", r.error},
              {"start_odom", odom_to_json(r.start_odom)},
              {"final_odom", odom_to_json(r.final_odom)},
              {"target_heading_deg", r.target_heading_deg},
              {"commanded_distance_m", r.commanded_distance_m}};
}

MoveResult result_from_json(const json& j) {
  MoveResult r;
  r.success = j.at("success").get<bool>();
  r.final_turn_error_deg = j.at("final_turn_error_deg").get<double>();
  r.final_straight_error_m = j.at("final_straight_error_m").get<double>();
  r.elapsed_s = j.at("elapsed_s").get<double>();
  r.collision = j.at("collision").get<bool>();
  r.error = j.at("error").get<std::string>();
  r.start_odom = odom_from_json(j.at("start_odom"));
  r.final_odom = odom_from_json(j.at("final_odom"));
  r.target_heading_deg = j.at("target_heading_deg").get<double>();
  r.commanded_distance_m = j.at("commanded_distance_m").get<double>();
  return r;
}

json trail_to_json(const std::vector<Pose2D>& trail) {
  json arr = json::array();
  for (const Pose2D& p : trail) arr.push_back(pose_to_json(p));
  return arr;
}

std::vector<Pose2D> trail_from_json(const json& j) {
  std::vector<Pose2D> trail;
  for (const json& p : j) trail.push_back(pose_from_json(p));
  return trail;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << text;
  if (!out) throw Error("short write: " + path);
}

}  // namespace

double round2(double value) { return std::round(value * 100.0) / 100.0; }

std::string format_percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", round2(value));
  return buf;
}

bool success(const EpisodeLog& log, const WorldMap& world) {
  if (log.status != EpisodeStatus::success_claimed) return false;
  if (static_cast<int>(log.actions.size()) > kActionBudget) return false;
  for (const StepRecord& s : log.actions) {
    if (s.result.collision) return false;
  }
  double d;
  if (log.distance_to_target_at_stop) {
    d = *log.distance_to_target_at_stop;
  } else {
    try {
      d = distance_to_object(world, log.final_pose.position(), log.target);
    } catch (const Error&) {
      return false;  // no such instance in this world
    }
  }
  return d < 1.0;
}

SuccessReport success_rate(const std::vector<EpisodeLog>& logs,
                           const WorldMap& world) {
  if (logs.empty()) throw Error("success_rate needs at least one episode log");
  SuccessReport report;
  for (Category c : kAllCategories) {
    CategoryStats stats;
    stats.category = c;
    double action_sum = 0.0;
    for (const EpisodeLog& log : logs) {
      if (log.target != c) continue;
      ++stats.episodes;
      action_sum += static_cast<double>(log.actions.size());
      if (success(log, world)) ++stats.successes;
    }
    if (stats.episodes == 0) continue;
    stats.sr_percent = round2(100.0 * stats.successes / stats.episodes);
    stats.sr_text = format_percent(stats.sr_percent);
    stats.avg_actions = action_sum / stats.episodes;
    report.successes += stats.successes;
    report.episodes += stats.episodes;
    report.per_category.push_back(std::move(stats));
  }
  report.overall_sr_percent =
      round2(100.0 * report.successes / report.episodes);
  report.overall_sr_text = format_percent(report.overall_sr_percent);
  const auto [km, hours] = stability_stats(logs);
  report.total_distance_km = km;
  report.total_time_hours = hours;
  for (const EpisodeLog& log : logs) {
    auto& counts = report.action_histogram[log.policy];
    for (const StepRecord& s : log.actions) {
      ++counts[to_string(s.executed.kind)];
    }
  }
  return report;
}

std::pair<double, double> stability_stats(const std::vector<EpisodeLog>& logs) {
  double meters = 0.0;
  double seconds = 0.0;
  for (const EpisodeLog& log : logs) {
    meters += log.total_path_length_m;
    seconds += log.total_sim_time_s;
  }
  return {meters / 1000.0, seconds / 3600.0};
}

std::string episode_to_json(const EpisodeLog& log) {
  json j;
  j["id"] = log.id;
  j["target"] = to_string(log.target);
  j["start_index"] = log.start_index;
  j["policy"] = log.policy;
  j["seed"] = log.seed;
  j["status"] = to_string(log.status);
  j["world_fingerprint"] = log.world_fingerprint;
  j["start_pose"] = pose_to_json(log.start_pose);
  j["final_pose"] = pose_to_json(log.final_pose);
  if (log.distance_to_target_at_stop) {
    j["distance_to_target_at_stop"] = *log.distance_to_target_at_stop;
  } else {
    j["distance_to_target_at_stop"] = nullptr;
  }
  j["total_path_length_m"] = log.total_path_length_m;
  j["total_sim_time_s"] = log.total_sim_time_s;
  j["observation_refs"] = log.observation_refs;
  j["truth_trail"] = trail_to_json(log.truth_trail);
  j["odom_trail"] = trail_to_json(log.odom_trail);
  json actions = json::array();
  for (const StepRecord& s : log.actions) {
    actions.push_back(json{{"index", s.index},
                           {"intended", action_to_json(s.intended)},
                           {"executed", action_to_json(s.executed)},
                           {"guard_triggered", s.guard_triggered},
                           {"call_stamp", s.call_stamp},
                           {"stamp", s.stamp},
                           {"odom_pose", pose_to_json(s.odom_pose)},
                           {"result", result_to_json(s.result)}});
  }
  j["actions"] = std::move(actions);
  return j.dump(2) + "\n";
}

EpisodeLog episode_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed episode log: ") + e.what());
  }
  try {
    EpisodeLog log;
    log.id = j.at("id").get<std::string>();
    log.target = category_from_string(j.at("target").get<std::string>());
    log.start_index = j.at("start_index").get<int>();
    log.policy = j.at("policy").get<std::string>();
    log.seed = j.at("seed").get<unsigned long long>();
    log.status = episode_status_from_string(j.at("status").get<std::string>());
    log.world_fingerprint = j.at("world_fingerprint").get<std::string>();
    log.start_pose = pose_from_json(j.at("start_pose"));
    log.final_pose = pose_from_json(j.at("final_pose"));
    if (!j.at("distance_to_target_at_stop").is_null()) {
      log.distance_to_target_at_stop =
          j.at("distance_to_target_at_stop").get<double>();
    }
    log.total_path_length_m = j.at("total_path_length_m").get<double>();
    log.total_sim_time_s = j.at("total_sim_time_s").get<double>();
    log.observation_refs =
        j.at("observation_refs").get<std::vector<std::string>>();
    log.truth_trail = trail_from_json(j.at("truth_trail"));
    log.odom_trail = trail_from_json(j.at("odom_trail"));
    for (const json& a : j.at("actions")) {
      StepRecord s;
      s.index = a.at("index").get<int>();
      s.intended = action_from_json(a.at("intended"));
      s.executed = action_from_json(a.at("executed"));
      s.guard_triggered = a.at("guard_triggered").get<bool>();
      s.call_stamp = a.at("call_stamp").get<double>();
      s.stamp = a.at("stamp").get<double>();
      s.odom_pose = pose_from_json(a.at("odom_pose"));
      s.result = result_from_json(a.at("result"));
      log.actions.push_back(std::move(s));
    }
    return log;
  } catch (const json::exception& e) {
    throw Error(std::string("episode log is missing fields: ") + e.what());
  }
}

EpisodeLog load_episode(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open episode log: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  try {
    return episode_from_json(text);
  } catch (const Error& e) {
    throw Error(std::string(e.what()) + " [" + path + "]");
  }
}

std::string report_to_json(const SuccessReport& report) {
  json j;
  j["overall"] = json{{"successes", report.successes},
                      {"episodes", report.episodes},
                      {"sr_percent", report.overall_sr_percent},
                      {"sr_text", report.overall_sr_text}};
  json cats = json::array();
  for (const CategoryStats& c : report.per_category) {
    cats.push_back(json{{"category", to_string(c.category)},
                        {"successes", c.successes},
                        {"episodes", c.episodes},
                        {"sr_percent", c.sr_percent},
                        {"sr_text", c.sr_text},
                        {"avg_actions", c.avg_actions}});
  }
  j["per_category"] = std::move(cats);
  j["stability"] = json{{"distance_km", report.total_distance_km},
                        {"time_hours", report.total_time_hours}};
  j["action_histogram"] = report.action_histogram;
  return j.dump(2) + "\n";
}

namespace {

json scan_to_json(const DepthScan& d, const SemanticScan& s) {
  json j;
  j["stamp"] = d.stamp;
  j["fov_deg"] = d.fov_deg;
  j["max_range"] = d.max_range;
  j["depth"] = d.ranges;
  json labels = json::array();
  for (RayLabel l : s.labels) labels.push_back(to_string(l));
  j["labels"] = std::move(labels);
  j["hit_ranges"] = s.hit_ranges;
  j["object_ranges"] = s.object_ranges;
  return j;
}

}  // namespace

void write_report(const SuccessReport& report, std::vector<EpisodeLog> logs,
                  const WorldMap& world, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "episodes", ec);
  fs::create_directories(fs::path(out_dir) / "plots", ec);
  if (ec) throw Error("cannot create report directory: " + out_dir);
  bool any_frames = false;
  for (const EpisodeLog& log : logs) {
    for (const StepRecord& s : log.actions) {
      if (s.depth_frame) any_frames = true;
    }
  }
  if (any_frames) fs::create_directories(fs::path(out_dir) / "frames", ec);
  for (EpisodeLog& log : logs) {
    for (const StepRecord& s : log.actions) {
      if (!s.depth_frame || !s.semantic_frame) continue;
      const std::string name =
          log.id + "_step" + std::to_string(s.index) + ".json";
      write_text_file((fs::path(out_dir) / "frames" / name).string(),
                      scan_to_json(*s.depth_frame, *s.semantic_frame).dump(2) +
                          "\n");
      log.observation_refs.push_back("frames/" + name);
    }
    write_text_file(
        (fs::path(out_dir) / "episodes" / (log.id + ".json")).string(),
        episode_to_json(log));
    write_text_file((fs::path(out_dir) / "plots" / (log.id + ".svg")).string(),
                    render_trajectory_svg(world, log));
  }
  for (const auto& [policy, counts] : report.action_histogram) {
    write_text_file(
        (fs::path(out_dir) / ("histogram_" + policy + ".svg")).string(),
        render_histogram_svg(policy, counts));
  }
  write_text_file((fs::path(out_dir) / "report.json").string(),
                  report_to_json(report));
}

SuiteResult run_suite(const WorldMap& world, int n_starts,
                      const std::vector<Category>& categories,
                      const EpisodeFn& run_one, unsigned long long base_seed,
                      int parallel) {
  if (n_starts < 1) throw Error("suite needs at least one start");
  if (n_starts > static_cast<int>(world.starts.size())) {
    throw Error("suite requested " + std::to_string(n_starts) +
                " starts but the world provides " +
                std::to_string(world.starts.size()));
  }
  if (categories.empty()) throw Error("suite needs at least one category");
  for (Category c : categories) {
    if (!world.has_category(c)) {
      throw Error(std::string("world has no instance of category '") +
                  to_string(c) + "'");
    }
  }
  struct Job {
    Category category;
    int start_index;
    unsigned long long seed;
  };
  std::vector<Job> jobs;
  for (std::size_t ci = 0; ci < categories.size(); ++ci) {
    for (int s = 1; s <= n_starts; ++s) {
      jobs.push_back(Job{categories[ci],
                         s,
                         mix_seed(base_seed, static_cast<std::uint64_t>(ci),
                                  static_cast<std::uint64_t>(s))});
    }
  }
  std::vector<EpisodeLog> logs(jobs.size());
  const int workers = std::max(1, parallel);
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      logs[i] = run_one(jobs[i].category, jobs[i].start_index, jobs[i].seed);
    }
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mu;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = static_cast<std::size_t>(w); i < jobs.size();
             i += static_cast<std::size_t>(workers)) {
          try {
            logs[i] =
                run_one(jobs[i].category, jobs[i].start_index, jobs[i].seed);
          } catch (...) {
            std::lock_guard<std::mutex> lk(error_mu);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }
  SuiteResult result;
  result.logs = std::move(logs);
  result.report = success_rate(result.logs, world);
  return result;
}

}  // namespace navstack
