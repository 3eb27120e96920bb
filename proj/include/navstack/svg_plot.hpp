#pragma once

#include <map>
#include <string>

#include "navstack/vsn_core.hpp"
#include "navstack/world.hpp"

namespace navstack {

// Top-down trajectory plot: walls, object discs (target instances ringed by
// the 1 m success radius), the start marker, the traveled path, and the final
// pose. Output is a self-contained SVG document, byte-stable for identical
// inputs.
std::string render_trajectory_svg(const WorldMap& world, const EpisodeLog& log);

// Bar chart of action counts, keyed by action name.
std::string render_histogram_svg(const std::string& title,
                                 const std::map<std::string, int>& counts);

}  // namespace navstack
