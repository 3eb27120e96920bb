#include "navstack/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace navstack {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Distance from a point to the closest point of a cell's square.
double point_cell_distance(const GridMap& g, const Vec2& p, int ix, int iy) {
  double x0 = ix * g.resolution, x1 = x0 + g.resolution;
  double y0 = iy * g.resolution, y1 = y0 + g.resolution;
  double dx = std::max({x0 - p.x, 0.0, p.x - x1});
  double dy = std::max({y0 - p.y, 0.0, p.y - y1});
  return std::hypot(dx, dy);
}

// First positive ray parameter at which the ray enters an occupied cell, or
// +inf. The ray origin must lie in a free cell.
double raycast_grid(const GridMap& g, const Vec2& origin, const Vec2& dir,
                    double max_t) {
  int ix = g.cell_x(origin.x);
  int iy = g.cell_y(origin.y);
  int step_x = dir.x > 0 ? 1 : (dir.x < 0 ? -1 : 0);
  int step_y = dir.y > 0 ? 1 : (dir.y < 0 ? -1 : 0);

  double t_max_x = kInf, t_max_y = kInf, t_delta_x = kInf, t_delta_y = kInf;
  if (step_x != 0) {
    double next = (step_x > 0 ? (ix + 1) * g.resolution : ix * g.resolution);
    t_max_x = (next - origin.x) / dir.x;
    t_delta_x = g.resolution / std::abs(dir.x);
  }
  if (step_y != 0) {
    double next = (step_y > 0 ? (iy + 1) * g.resolution : iy * g.resolution);
    t_max_y = (next - origin.y) / dir.y;
    t_delta_y = g.resolution / std::abs(dir.y);
  }

  double t = 0.0;
  while (t <= max_t) {
    if (t_max_x <= t_max_y) {
      t = t_max_x;
      t_max_x += t_delta_x;
      ix += step_x;
    } else {
      t = t_max_y;
      t_max_y += t_delta_y;
      iy += step_y;
    }
    if (t > max_t) break;
    if (g.occupied(ix, iy)) return t;
  }
  return kInf;
}

// Smallest positive ray parameter at which the ray enters the disc, or +inf.
double raycast_disc(const Vec2& origin, const Vec2& dir, const Vec2& center,
                    double radius) {
  Vec2 oc = origin - center;
  double b = oc.dot(dir);
  double c = oc.dot(oc) - radius * radius;
  double disc = b * b - c;
  if (disc < 0.0) return kInf;
  double root = std::sqrt(disc);
  double t0 = -b - root;
  if (t0 > 0.0) return t0;
  double t1 = -b + root;
  if (t1 > 0.0) return 0.0;  // origin inside the disc
  return kInf;
}

struct RayHit {
  double range = kInf;          // surface distance
  double object_range = kInf;   // centroid distance for object hits
  RayLabel label = RayLabel::none;
  bool object_hit = false;
};

RayHit cast_ray(const WorldMap& world, const Vec2& origin, double angle_deg,
                double max_range) {
  Vec2 dir = heading_dir(angle_deg);
  RayHit hit;
  double grid_t = raycast_grid(world.grid, origin, dir, max_range);
  if (grid_t <= max_range) {
    hit.range = grid_t;
    hit.label = RayLabel::wall;
  }
  for (const auto& obj : world.objects) {
    double t = raycast_disc(origin, dir, obj.centroid, obj.radius);
    if (t < hit.range && t <= max_range) {
      hit.range = t;
      hit.object_range = distance(origin, obj.centroid);
      hit.label = to_ray_label(obj.category);
      hit.object_hit = true;
    }
  }
  return hit;
}

void require_valid_sensor_pose(const WorldMap& world, const Pose2D& pose) {
  const GridMap& g = world.grid;
  if (g.occupied(g.cell_x(pose.x), g.cell_y(pose.y))) {
    throw Error("sensor pose inside an occupied cell");
  }
  for (const auto& obj : world.objects) {
    if (distance(pose.position(), obj.centroid) < obj.radius) {
      throw Error("sensor pose inside an object footprint");
    }
  }
}

Pose2D arc_advance(const Pose2D& p, double v, double w, double dt) {
  double h0 = deg_to_rad(p.heading_deg);
  Pose2D out = p;
  if (std::abs(w) < 1e-12) {
    out.x += v * dt * std::cos(h0);
    out.y += v * dt * std::sin(h0);
  } else {
    double h1 = h0 + w * dt;
    double r = v / w;
    out.x += r * (std::sin(h1) - std::sin(h0));
    out.y += r * (-std::cos(h1) + std::cos(h0));
    out.heading_deg = normalize_deg(p.heading_deg + rad_to_deg(w * dt));
  }
  return out;
}

}  // namespace

bool check_collision(const WorldMap& world, const Vec2& pos, double radius) {
  const GridMap& g = world.grid;
  if (radius <= 0.0) {
    if (g.occupied(g.cell_x(pos.x), g.cell_y(pos.y))) return true;
  } else {
    int ix0 = g.cell_x(pos.x - radius);
    int ix1 = g.cell_x(pos.x + radius);
    int iy0 = g.cell_y(pos.y - radius);
    int iy1 = g.cell_y(pos.y + radius);
    for (int iy = iy0; iy <= iy1; ++iy) {
      for (int ix = ix0; ix <= ix1; ++ix) {
        if (!g.occupied(ix, iy)) continue;
        if (point_cell_distance(g, pos, ix, iy) < radius) return true;
      }
    }
  }
  for (const auto& obj : world.objects) {
    if (distance(pos, obj.centroid) < radius + obj.radius) return true;
  }
  return false;
}

StepResult step(const RobotState& state, const Twist& cmd, double dt,
                const WorldMap& world, const NoiseModel& noise, Rng& rng) {
  if (dt < 0.0) throw Error("step: negative dt");
  double v = cmd.v;
  double w = cmd.w;
  if (noise.actuation_scale_sigma > 0.0) {
    v *= 1.0 + rng.normal(0.0, noise.actuation_scale_sigma);
    w *= 1.0 + rng.normal(0.0, noise.actuation_scale_sigma);
  }

  StepResult out;
  out.state = state;
  if (dt == 0.0) return out;

  if (std::abs(v) < 1e-12) {
    // A rotating disc sweeps no new area; pure rotation never collides.
    out.state.pose = arc_advance(state.pose, v, w, dt);
    return out;
  }

  double arc_len = std::abs(v) * dt;
  int samples = std::max(1, static_cast<int>(std::ceil(
                                arc_len / (world.grid.resolution * 0.25))));
  double prev_t = 0.0;
  double hit_t = -1.0;
  for (int i = 1; i <= samples; ++i) {
    double ti = dt * i / samples;
    Pose2D p = arc_advance(state.pose, v, w, ti);
    if (check_collision(world, p.position(), state.radius)) {
      hit_t = ti;
      break;
    }
    prev_t = ti;
  }
  if (hit_t < 0.0) {
    out.state.pose = arc_advance(state.pose, v, w, dt);
    out.path_length = arc_len;
    return out;
  }

  // Bisect the first contact time, keeping the pose at the last free sample.
  double lo = prev_t, hi = hit_t;
  for (int i = 0; i < 40; ++i) {
    double mid = 0.5 * (lo + hi);
    Pose2D p = arc_advance(state.pose, v, w, mid);
    if (check_collision(world, p.position(), state.radius)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.state.pose = arc_advance(state.pose, v, w, lo);
  out.collision = true;
  out.path_length = std::abs(v) * lo;
  return out;
}

DepthScan render_depth(const WorldMap& world, const Pose2D& pose,
                       const SensorGeometry& geom, const NoiseModel& noise,
                       Rng& rng, double stamp) {
  require_valid_sensor_pose(world, pose);
  DepthScan scan;
  scan.fov_deg = geom.fov_deg;
  scan.max_range = geom.max_range;
  scan.stamp = stamp;
  scan.pose_hint = pose;
  scan.ranges.resize(geom.n_rays);
  double spacing = geom.fov_deg / geom.n_rays;
  for (int i = 0; i < geom.n_rays; ++i) {
    double angle = pose.heading_deg - geom.fov_deg / 2.0 + i * spacing;
    RayHit hit = cast_ray(world, pose.position(), angle, geom.max_range);
    double d = std::min(hit.range, geom.max_range);
    if (noise.depth_gaussian_sigma > 0.0) {
      d += rng.normal(0.0, noise.depth_gaussian_sigma);
      d = std::clamp(d, 1e-3, geom.max_range);
    }
    if (noise.depth_impulse_prob > 0.0 && rng.bernoulli(noise.depth_impulse_prob)) {
      d = rng.uniform(1e-3, geom.max_range);
    }
    if (noise.depth_dropout_prob > 0.0 && rng.bernoulli(noise.depth_dropout_prob)) {
      d = 0.0;
    }
    scan.ranges[i] = d;
  }
  return scan;
}

SemanticScan render_semantic(const WorldMap& world, const Pose2D& pose,
                             const SensorGeometry& geom, double stamp) {
  require_valid_sensor_pose(world, pose);
  SemanticScan scan;
  scan.fov_deg = geom.fov_deg;
  scan.max_range = geom.max_range;
  scan.stamp = stamp;
  scan.pose_hint = pose;
  scan.labels.resize(geom.n_rays);
  scan.hit_ranges.resize(geom.n_rays);
  scan.object_ranges.resize(geom.n_rays);
  scan.visible.resize(geom.n_rays);
  double spacing = geom.fov_deg / geom.n_rays;
  for (int i = 0; i < geom.n_rays; ++i) {
    double angle = pose.heading_deg - geom.fov_deg / 2.0 + i * spacing;
    RayHit hit = cast_ray(world, pose.position(), angle, geom.max_range);
    double d = std::min(hit.range, geom.max_range);
    scan.labels[i] = hit.range <= geom.max_range ? hit.label : RayLabel::none;
    scan.hit_ranges[i] = d;
    scan.object_ranges[i] = hit.object_hit ? hit.object_range : d;
    scan.visible[i] = hit.object_hit ? 1 : 0;
  }
  return scan;
}

double distance_to_object(const WorldMap& world, const Vec2& pos, Category category) {
  double best = kInf;
  for (const auto& obj : world.objects) {
    if (obj.category != category) continue;
    best = std::min(best, distance(pos, obj.centroid));
  }
  if (!std::isfinite(best)) {
    throw Error(std::string("world holds no instance of category '") +
                to_string(category) + "'");
  }
  return best;
}

WorldMap parse_world(const std::string& json_text, double robot_radius) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("world file is not valid JSON: ") + e.what());
  }

  WorldMap world;
  if (!j.contains("resolution") || !j["resolution"].is_number()) {
    throw Error("world file: missing numeric 'resolution'");
  }
  world.grid.resolution = j["resolution"].get<double>();
  if (world.grid.resolution <= 0.0) throw Error("world file: resolution must be positive");

  if (!j.contains("grid") || !j["grid"].is_array() || j["grid"].empty()) {
    throw Error("world file: missing non-empty 'grid'");
  }
  const auto& rows = j["grid"];
  int height = static_cast<int>(rows.size());
  int width = static_cast<int>(rows[0].get<std::string>().size());
  if (width < 3 || height < 3) throw Error("world file: grid too small");
  world.grid.width = width;
  world.grid.height = height;
  world.grid.occ.assign(static_cast<std::size_t>(width) * height, 0);
  for (int r = 0; r < height; ++r) {
    std::string row = rows[r].get<std::string>();
    if (static_cast<int>(row.size()) != width) {
      throw Error("world file: grid row " + std::to_string(r) + " has inconsistent width");
    }
    int iy = height - 1 - r;  // row 0 is the top of the map
    for (int ix = 0; ix < width; ++ix) {
      char c = row[static_cast<std::size_t>(ix)];
      if (c == '#') {
        world.grid.set(ix, iy, true);
      } else if (c != '.') {
        throw Error(std::string("world file: grid row ") + std::to_string(r) +
                    " holds invalid character '" + c + "'");
      }
    }
  }
  for (int ix = 0; ix < width; ++ix) {
    if (!world.grid.occupied(ix, 0) || !world.grid.occupied(ix, height - 1)) {
      throw Error("world file: grid boundary is open (world must be closed)");
    }
  }
  for (int iy = 0; iy < height; ++iy) {
    if (!world.grid.occupied(0, iy) || !world.grid.occupied(width - 1, iy)) {
      throw Error("world file: grid boundary is open (world must be closed)");
    }
  }

  if (j.contains("objects")) {
    for (const auto& jo : j["objects"]) {
      ObjectInstance obj;
      obj.category = category_from_string(jo.at("category").get<std::string>());
      obj.centroid = {jo.at("x").get<double>(), jo.at("y").get<double>()};
      obj.radius = jo.at("radius").get<double>();
      if (obj.radius < 0.0) {
        throw Error(std::string("world file: object '") + to_string(obj.category) +
                    "' has negative radius");
      }
      const GridMap& g = world.grid;
      if (g.occupied(g.cell_x(obj.centroid.x), g.cell_y(obj.centroid.y))) {
        std::ostringstream os;
        os << "world file: object '" << to_string(obj.category) << "' at ("
           << obj.centroid.x << ", " << obj.centroid.y
           << ") has its centroid in an occupied cell";
        throw Error(os.str());
      }
      world.objects.push_back(obj);
    }
  }

  if (!j.contains("starts") || !j["starts"].is_array() || j["starts"].empty()) {
    throw Error("world file: at least one start pose is required");
  }
  int idx = 0;
  for (const auto& js : j["starts"]) {
    ++idx;
    Pose2D p;
    p.x = js.at("x").get<double>();
    p.y = js.at("y").get<double>();
    p.heading_deg = normalize_deg(js.value("heading", 0.0));
    if (check_collision(world, p.position(), robot_radius)) {
      std::ostringstream os;
      os << "world file: start " << idx << " at (" << p.x << ", " << p.y
         << ") lacks robot clearance";
      throw Error(os.str());
    }
    world.starts.push_back(p);
  }
  return world;
}

WorldMap load_world(const std::string& path, double robot_radius) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open world file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_world(buf.str(), robot_radius);
  } catch (const Error& e) {
    throw Error(std::string(e.what()) + " [" + path + "]");
  }
}

std::string world_fingerprint(const WorldMap& world) {
  // FNV-1a over the structural content; used to match logs to worlds.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  mix(&world.grid.width, sizeof world.grid.width);
  mix(&world.grid.height, sizeof world.grid.height);
  mix(&world.grid.resolution, sizeof world.grid.resolution);
  mix(world.grid.occ.data(), world.grid.occ.size());
  for (const auto& o : world.objects) {
    mix(&o.category, sizeof o.category);
    mix(&o.centroid, sizeof o.centroid);
    mix(&o.radius, sizeof o.radius);
  }
  for (const auto& s : world.starts) {
    mix(&s, sizeof s);
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace navstack
