#pragma once

#include <string>

#include "navstack/bus.hpp"
#include "navstack/config.hpp"
#include "navstack/scheduler.hpp"
#include "navstack/world.hpp"

namespace navstack {

struct CameraConfig {
  SensorGeometry geom;
  double rate_hz = 10.0;
};

CameraConfig camera_config_from(const ConfigFile& cfg);

// Sensor head: renders the depth fan and the semantic detector stand-in from
// the true pose at a fixed rate. Both scans of a capture share stamp and
// pose. Invalid capture poses surface as faults on the bus, never as crashes.
class CameraApiNode {
 public:
  CameraApiNode(Bus& bus, Scheduler& sched, SimWorld& sim, CameraConfig cfg,
                const std::string& node_name = "camera_api");

  const CameraConfig& config() const { return cfg_; }
  void set_rate(double hz);
  std::uint64_t captures() const { return captures_; }

 private:
  void capture(double t);

  Bus& bus_;
  Scheduler& sched_;
  SimWorld& sim_;
  CameraConfig cfg_;
  Publisher color_pub_;
  Publisher depth_pub_;
  Publisher fault_pub_;
  Rng rng_;
  Scheduler::TaskId task_ = 0;
  std::uint64_t captures_ = 0;
};

}  // namespace navstack
