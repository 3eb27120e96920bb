#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "navstack/eval.hpp"
#include "navstack/policies.hpp"
#include "navstack/runtime.hpp"

namespace {

using namespace navstack;

std::string resolve_out(const std::string& flag, const char* fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("NAVSTACK_OUT"); env && *env) return env;
  return fallback;
}

WorldMap load_world_or_die(const std::string& path) {
  try {
    return load_world(path);
  } catch (const Error& e) {
    std::fprintf(stderr, "navstack: failed to load world '%s': %s\n",
                 path.c_str(), e.what());
    std::exit(1);
  }
}

StackConfig load_config_or_die(const std::string& path) {
  if (path.empty()) return StackConfig{};
  try {
    return load_stack_config(path);
  } catch (const Error& e) {
    std::fprintf(stderr, "navstack: failed to load config '%s': %s\n",
                 path.c_str(), e.what());
    std::exit(1);
  }
}

std::vector<Category> parse_categories(const std::string& csv,
                                       const WorldMap& world) {
  std::vector<Category> out;
  if (csv.empty()) {
    for (Category c : kAllCategories) {
      if (world.has_category(c)) out.push_back(c);
    }
    return out;
  }
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t comma = csv.find(',', pos);
    std::string tok = csv.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    while (!tok.empty() && tok.front() == ' ') tok.erase(tok.begin());
    while (!tok.empty() && tok.back() == ' ') tok.pop_back();
    if (!tok.empty()) out.push_back(category_from_string(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw Error("empty category list");
  return out;
}

void print_episode_line(const EpisodeLog& log, const WorldMap& world) {
  const char* ok = success(log, world) ? "yes" : "no";
  std::printf(
      "%s: status=%s actions=%d success=%s path=%.2fm sim_time=%.1fs\n",
      log.id.c_str(), to_string(log.status),
      static_cast<int>(log.actions.size()), ok, log.total_path_length_m,
      log.total_sim_time_s);
}

int cmd_run(const std::string& world_path, const std::string& config_path,
            const std::string& out_flag, const std::string& policy,
            const std::string& target_str, int start, unsigned long long seed,
            int max_steps, double scorer_miss) {
  WorldMap world = load_world_or_die(world_path);
  StackConfig cfg = load_config_or_die(config_path);
  if (max_steps > 0) cfg.vsn.max_steps = max_steps;

  EpisodeParams params;
  params.policy_name = policy;
  params.start_index = start;
  params.seed = seed;
  params.scorer_miss_probability = scorer_miss;
  try {
    if (!target_str.empty()) {
      params.target = category_from_string(target_str);
    } else if (cfg.vsn.target) {
      params.target = *cfg.vsn.target;
    } else {
      throw Error("no target category: pass --target or set vsn.target");
    }
    EpisodeLog log = run_episode_instance(world, cfg, params);
    print_episode_line(log, world);
    const std::string out = resolve_out(out_flag, "");
    if (!out.empty()) {
      std::vector<EpisodeLog> logs{log};
      write_report(success_rate(logs, world), logs, world, out);
      std::printf("report written to %s\n", out.c_str());
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "navstack: %s\n", e.what());
    return 1;
  }
  return 0;
}

int cmd_suite(const std::string& world_path, const std::string& config_path,
              const std::string& out_flag, const std::string& policy,
              const std::string& categories_csv, int n_starts,
              unsigned long long seed, int parallel, bool lockstep,
              int max_steps, double scorer_miss) {
  WorldMap world = load_world_or_die(world_path);
  StackConfig cfg = load_config_or_die(config_path);
  if (max_steps > 0) cfg.vsn.max_steps = max_steps;
  if (lockstep) parallel = 1;  // strict single-threaded deterministic order
  if (parallel < 1) parallel = 1;

  try {
    const std::vector<Category> cats = parse_categories(categories_csv, world);
    if (n_starts <= 0 || n_starts > static_cast<int>(world.starts.size())) {
      n_starts = static_cast<int>(world.starts.size());
    }
    const EpisodeFn run_one = [&](Category c, int s, unsigned long long sd) {
      EpisodeParams p;
      p.target = c;
      p.start_index = s;
      p.seed = sd;
      p.policy_name = policy;
      p.scorer_miss_probability = scorer_miss;
      return run_episode_instance(world, cfg, p);
    };
    SuiteResult res = run_suite(world, n_starts, cats, run_one, seed, parallel);
    for (const CategoryStats& c : res.report.per_category) {
      std::printf("%-14s SR %s%% (%d/%d) avg actions %.1f\n",
                  to_string(c.category), c.sr_text.c_str(), c.successes,
                  c.episodes, c.avg_actions);
    }
    std::printf("overall        SR %s%% (%d/%d)\n",
                res.report.overall_sr_text.c_str(), res.report.successes,
                res.report.episodes);
    std::printf("stability      %.2f km traveled, %.2f h simulated\n",
                res.report.total_distance_km, res.report.total_time_hours);
    const std::string out = resolve_out(out_flag, "navstack_out");
    write_report(res.report, res.logs, world, out);
    std::printf("report written to %s\n", out.c_str());
  } catch (const Error& e) {
    std::fprintf(stderr, "navstack: %s\n", e.what());
    return 1;
  }
  return 0;
}

int cmd_replay(const std::string& log_path, const std::string& world_path,
               const std::string& config_path) {
  WorldMap world = load_world_or_die(world_path);
  StackConfig cfg = load_config_or_die(config_path);
  try {
    EpisodeLog log = load_episode(log_path);
    ReplayResult r = replay_episode(log, world, cfg);
    std::printf(
        "replayed %d actions: position error %.4f m (bound %.4f), "
        "heading error %.3f deg (bound %.3f)\n",
        static_cast<int>(log.actions.size()), r.position_error_m,
        r.position_bound_m, r.heading_error_deg, r.heading_bound_deg);
    if (!r.within_bounds) {
      std::fprintf(stderr, "navstack: replay diverged beyond tolerance\n");
      return 2;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "navstack: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"navstack: discrete object navigation on a simulated base"};
  app.require_subcommand(1);

  std::string world_path;
  std::string config_path;
  std::string out_flag;
  std::string policy = "vlv";
  std::string target_str;
  std::string categories_csv;
  std::string log_path;
  int start = 1;
  int n_starts = 0;
  unsigned long long seed = 0;
  int parallel = 1;
  bool lockstep = false;
  int max_steps = 0;
  double scorer_miss = 0.0;

  CLI::App* run = app.add_subcommand("run", "Run one episode");
  run->add_option("--world", world_path, "World JSON file")->required();
  run->add_option("--policy", policy, "Policy name (vlv|random|oracle)");
  run->add_option("--target", target_str, "Target object category");
  run->add_option("--start", start, "1-based start pose index");
  run->add_option("--seed", seed, "Episode seed");
  run->add_option("--config", config_path, "Launcher config file");
  run->add_option("--out", out_flag,
                  "Output directory (falls back to $NAVSTACK_OUT)");
  run->add_option("--max-steps", max_steps, "Action budget override");
  run->add_option("--scorer-miss", scorer_miss,
                  "Detector miss probability for the vlv scorer");
  run->add_flag("--lockstep", lockstep,
                "Accepted for parity; single runs are always lockstep");

  CLI::App* suite = app.add_subcommand(
      "suite", "Run one episode per (category, start) and aggregate");
  suite->add_option("--world", world_path, "World JSON file")->required();
  suite->add_option("--policy", policy, "Policy name (vlv|random|oracle)");
  suite->add_option("--categories", categories_csv,
                    "Comma-separated categories (default: all in the world)");
  suite->add_option("--start", n_starts,
                    "Number of start poses to use (default: all)");
  suite->add_option("--seed", seed, "Base seed for episode derivation");
  suite->add_option("--config", config_path, "Launcher config file");
  suite->add_option("--out", out_flag,
                    "Output directory (falls back to $NAVSTACK_OUT)");
  suite->add_option("--parallel", parallel, "Worker threads");
  suite->add_flag("--lockstep", lockstep, "Force single-threaded execution");
  suite->add_option("--max-steps", max_steps, "Action budget override");
  suite->add_option("--scorer-miss", scorer_miss,
                    "Detector miss probability for the vlv scorer");

  CLI::App* replay = app.add_subcommand(
      "replay", "Re-execute a logged episode and check the final pose");
  replay->add_option("log", log_path, "Episode JSON file")->required();
  replay->add_option("--world", world_path, "World JSON file")->required();
  replay->add_option("--config", config_path, "Launcher config file");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return cmd_run(world_path, config_path, out_flag, policy, target_str,
                   start, seed, max_steps, scorer_miss);
  }
  if (suite->parsed()) {
    return cmd_suite(world_path, config_path, out_flag, policy, categories_csv,
                     n_starts, seed, parallel, lockstep, max_steps,
                     scorer_miss);
  }
  return cmd_replay(log_path, world_path, config_path);
}
