#include "navstack/camera_api.hpp"

namespace navstack {

CameraConfig camera_config_from(const ConfigFile& cfg) {
  CameraConfig c;
  c.geom.fov_deg = cfg.get_double("camera.fov_deg", c.geom.fov_deg);
  c.geom.n_rays = cfg.get_int("camera.n_rays", c.geom.n_rays);
  c.geom.max_range = cfg.get_double("camera.max_range_m", c.geom.max_range);
  c.rate_hz = cfg.get_double("camera.rate_hz", c.rate_hz);
  if (!(c.geom.fov_deg > 0.0) || c.geom.fov_deg > 360.0) {
    throw Error("camera config: fov_deg must be in (0, 360]");
  }
  if (c.geom.n_rays < 1) throw Error("camera config: n_rays must be at least 1");
  if (!(c.geom.max_range > 0.0)) throw Error("camera config: max_range_m must be positive");
  if (!(c.rate_hz > 0.0)) throw Error("camera config: rate_hz must be positive");
  return c;
}

CameraApiNode::CameraApiNode(Bus& bus, Scheduler& sched, SimWorld& sim,
                             CameraConfig cfg, const std::string& node_name)
    : bus_(bus),
      sched_(sched),
      sim_(sim),
      cfg_(cfg),
      rng_(mix_seed(sim.noise().rng_seed, 0xca3a)) {
  if (!(cfg_.rate_hz > 0.0)) throw Error("camera rate must be positive");
  color_pub_ = bus_.advertise("/camera/color", node_name);
  depth_pub_ = bus_.advertise("/camera/depth", node_name);
  fault_pub_ = bus_.advertise("/camera/fault", node_name);
  task_ = sched_.schedule_every(1.0 / cfg_.rate_hz, sched_.now(),
                                [this](double t) { capture(t); });
}

void CameraApiNode::set_rate(double hz) {
  if (!(hz > 0.0)) throw Error("camera rate must be positive");
  cfg_.rate_hz = hz;
  sched_.cancel(task_);
  task_ = sched_.schedule_every(1.0 / hz, sched_.now(),
                                [this](double t) { capture(t); });
}

void CameraApiNode::capture(double t) {
  try {
    SemanticScan color = render_semantic(sim_.map(), sim_.pose(), cfg_.geom, t);
    DepthScan depth =
        render_depth(sim_.map(), sim_.pose(), cfg_.geom, sim_.noise(), rng_, t);
    color_pub_.publish(std::move(color));
    depth_pub_.publish(std::move(depth));
    ++captures_;
  } catch (const Error& e) {
    fault_pub_.publish(CameraFault{e.what(), t});
  }
}

}  // namespace navstack
