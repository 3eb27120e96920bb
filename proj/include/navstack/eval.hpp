#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "navstack/vsn_core.hpp"
#include "navstack/world.hpp"

namespace navstack {

struct CategoryStats {
  Category category = Category::chair;
  int successes = 0;
  int episodes = 0;
  double sr_percent = 0.0;   // rounded to two decimals
  std::string sr_text;       // two decimals, point separator
  double avg_actions = 0.0;  // mean over all episodes, success or not
};

struct SuccessReport {
  std::vector<CategoryStats> per_category;  // category enum order
  int successes = 0;
  int episodes = 0;
  double overall_sr_percent = 0.0;
  std::string overall_sr_text;
  double total_distance_km = 0.0;
  double total_time_hours = 0.0;
  // policy name -> action kind -> count over executed actions
  std::map<std::string, std::map<std::string, int>> action_histogram;
};

// Rounds to two decimals (half away from zero) and formats with a point.
double round2(double value);
std::string format_percent(double value);

// Success rule: STOP was claimed, the ground-truth distance to the nearest
// target centroid is under 1 m, the action budget held, and no action
// collided.
bool success(const EpisodeLog& log, const WorldMap& world);

SuccessReport success_rate(const std::vector<EpisodeLog>& logs,
                           const WorldMap& world);

// Total traveled distance (km) and simulated time (hours) across logs.
std::pair<double, double> stability_stats(const std::vector<EpisodeLog>& logs);

// JSON round-trip for episode logs (used by the report writer and replay).
std::string episode_to_json(const EpisodeLog& log);
EpisodeLog episode_from_json(const std::string& text);
EpisodeLog load_episode(const std::string& path);

std::string report_to_json(const SuccessReport& report);

// Writes report.json, per-episode logs, per-episode trajectory SVGs, a
// per-policy action histogram SVG, and any stored observation frames under
// out_dir. Output is byte-stable for identical inputs.
void write_report(const SuccessReport& report, std::vector<EpisodeLog> logs,
                  const WorldMap& world, const std::string& out_dir);

// Runs one episode per (category, start) pair in deterministic order and
// aggregates. `run_one` must be safe to call from `parallel` threads at once
// on distinct arguments; episode seeds are derived from base_seed.
using EpisodeFn =
    std::function<EpisodeLog(Category, int /*start_index*/, unsigned long long /*seed*/)>;

struct SuiteResult {
  SuccessReport report;
  std::vector<EpisodeLog> logs;
};

SuiteResult run_suite(const WorldMap& world, int n_starts,
                      const std::vector<Category>& categories,
                      const EpisodeFn& run_one, unsigned long long base_seed,
                      int parallel = 1);

}  // namespace navstack
