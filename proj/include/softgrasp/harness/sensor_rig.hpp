#pragma once

#include <array>
#include <functional>
#include <memory>

#include "softgrasp/hub/sensor_hub.hpp"
#include "softgrasp/harness/sim_plant.hpp"
#include "softgrasp/node/sensor_node.hpp"

namespace softgrasp::harness {

struct RigOptions {
  /// Lock-step: nodes capture only when the plant says so and timestamp with
  /// the plant clock.  Otherwise each node runs its own capture loop on the
  /// wall clock.
  bool lockstep = true;
  double capture_period_ms = 1000.0 / 30.0;
  double contact_threshold = tactile::kDefaultContactThreshold;
};

/// Five sensor nodes in this process, on ephemeral loopback ports, each fed by
/// one of the plant's fingertip cameras.
class LocalSensorRig {
 public:
  LocalSensorRig(SimPlant& plant, RigOptions options);
  ~LocalSensorRig();
  LocalSensorRig(const LocalSensorRig&) = delete;
  LocalSensorRig& operator=(const LocalSensorRig&) = delete;

  /// Hub settings pointing at the five nodes.
  hub::HubConfig hub_config() const;
  node::SensorNode& node(std::size_t n) { return *nodes_.at(n); }
  const RigOptions& options() const { return options_; }

 private:
  SimPlant& plant_;
  RigOptions options_;
  std::array<std::unique_ptr<node::SensorNode>, hub::kSensorCount> nodes_;
};

}  // namespace softgrasp::harness
