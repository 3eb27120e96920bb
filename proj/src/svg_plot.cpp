#include "navstack/svg_plot.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace navstack {

namespace {

constexpr double kScale = 80.0;  // px per meter
constexpr double kMargin = 24.0; // px

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Mapper {
  double height_m;
  double sx(double x) const { return kMargin + x * kScale; }
  double sy(double y) const { return kMargin + (height_m - y) * kScale; }
};

void wall_rects(std::ostringstream& out, const WorldMap& world, const Mapper& m) {
  const GridMap& g = world.grid;
  const double res = g.resolution;
  for (int iy = 0; iy < g.height; ++iy) {
    int run = -1;
    for (int ix = 0; ix <= g.width; ++ix) {
      const bool occ = ix < g.width && g.occupied(ix, iy);
      if (occ && run < 0) run = ix;
      if (!occ && run >= 0) {
        const double x0 = run * res;
        const double y1 = (iy + 1) * res;
        out << "<rect x=\"" << num(m.sx(x0)) << "\" y=\"" << num(m.sy(y1))
            << "\" width=\"" << num((ix - run) * res * kScale)
            << "\" height=\"" << num(res * kScale) << "\" fill=\"#333\"/>\n";
        run = -1;
      }
    }
  }
}

void trail_polyline(std::ostringstream& out, const std::vector<Pose2D>& trail,
                    const Mapper& m, const char* color) {
  if (trail.size() < 2) return;
  out << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < trail.size(); ++i) {
    if (i) out << ' ';
    out << num(m.sx(trail[i].x)) << ',' << num(m.sy(trail[i].y));
  }
  out << "\"/>\n";
}

void pose_marker(std::ostringstream& out, const Pose2D& p, const Mapper& m,
                 const char* color, double radius_px) {
  const Vec2 tip = p.position() + heading_dir(p.heading_deg) * 0.25;
  out << "<circle cx=\"" << num(m.sx(p.x)) << "\" cy=\"" << num(m.sy(p.y))
      << "\" r=\"" << num(radius_px) << "\" fill=\"" << color << "\"/>\n"
      << "<line x1=\"" << num(m.sx(p.x)) << "\" y1=\"" << num(m.sy(p.y))
      << "\" x2=\"" << num(m.sx(tip.x)) << "\" y2=\"" << num(m.sy(tip.y))
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
}

}  // namespace

std::string render_trajectory_svg(const WorldMap& world, const EpisodeLog& log) {
  const double wm = world.grid.width_m();
  const double hm = world.grid.height_m();
  const Mapper m{hm};
  const double width = wm * kScale + 2 * kMargin;
  const double height = hm * kScale + 2 * kMargin;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width)
      << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(width)
      << ' ' << num(height) << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" fill=\"#fafafa\"/>\n";
  wall_rects(out, world, m);
  for (const ObjectInstance& obj : world.objects) {
    const bool is_target = obj.category == log.target;
    out << "<circle cx=\"" << num(m.sx(obj.centroid.x)) << "\" cy=\""
        << num(m.sy(obj.centroid.y)) << "\" r=\"" << num(obj.radius * kScale)
        << "\" fill=\"" << (is_target ? "#d08020" : "#8090a8")
        << "\" fill-opacity=\"0.8\"/>\n";
    if (is_target) {
      out << "<circle cx=\"" << num(m.sx(obj.centroid.x)) << "\" cy=\""
          << num(m.sy(obj.centroid.y)) << "\" r=\"" << num(1.0 * kScale)
          << "\" fill=\"none\" stroke=\"#d08020\" stroke-width=\"1.5\""
          << " stroke-dasharray=\"6 4\"/>\n";
    }
    out << "<text x=\"" << num(m.sx(obj.centroid.x)) << "\" y=\""
        << num(m.sy(obj.centroid.y) + 4) << "\" font-size=\"11\""
        << " text-anchor=\"middle\" fill=\"#222\">"
        << to_string(obj.category) << "</text>\n";
  }
  // Prefer ground truth; fall back to odometry composed with the start pose.
  std::vector<Pose2D> trail = log.truth_trail;
  if (trail.empty()) {
    for (const Pose2D& rel : log.odom_trail) {
      trail.push_back(compose(log.start_pose, rel));
    }
  }
  trail_polyline(out, trail, m, "#2060c0");
  pose_marker(out, log.start_pose, m, "#20a040", 5.0);
  if (!trail.empty()) pose_marker(out, trail.back(), m, "#c03030", 5.0);
  out << "<text x=\"" << num(kMargin) << "\" y=\"" << num(16.0)
      << "\" font-size=\"12\" fill=\"#222\">" << log.id << " ["
      << to_string(log.status) << "]</text>\n";
  out << "</svg>\n";
  return out.str();
}

std::string render_histogram_svg(const std::string& title,
                                 const std::map<std::string, int>& counts) {
  const double bar_w = 90.0;
  const double gap = 24.0;
  const double chart_h = 200.0;
  const double base_y = chart_h + 40.0;
  const double width =
      kMargin * 2 + counts.size() * bar_w + (counts.empty() ? 0 : (counts.size() - 1) * gap);
  const double height = base_y + 40.0;
  int max_count = 1;
  for (const auto& [name, count] : counts) max_count = std::max(max_count, count);
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width)
      << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(width)
      << ' ' << num(height) << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" fill=\"#fafafa\"/>\n";
  out << "<text x=\"" << num(kMargin) << "\" y=\"20\" font-size=\"14\""
      << " fill=\"#222\">" << title << "</text>\n";
  double x = kMargin;
  for (const auto& [name, count] : counts) {
    const double h = chart_h * count / max_count;
    out << "<rect x=\"" << num(x) << "\" y=\"" << num(base_y - h)
        << "\" width=\"" << num(bar_w) << "\" height=\"" << num(h)
        << "\" fill=\"#4070b0\"/>\n";
    out << "<text x=\"" << num(x + bar_w / 2) << "\" y=\"" << num(base_y - h - 6)
        << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#222\">" << count
        << "</text>\n";
    out << "<text x=\"" << num(x + bar_w / 2) << "\" y=\"" << num(base_y + 16)
        << "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#222\">" << name
        << "</text>\n";
    x += bar_w + gap;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace navstack
