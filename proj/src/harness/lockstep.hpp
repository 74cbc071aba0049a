#pragma once

#include "softgrasp/harness/experiment.hpp"
#include "softgrasp/harness/sensor_rig.hpp"
#include "softgrasp/harness/sim_plant.hpp"
#include "softgrasp/hub/sensor_hub.hpp"

namespace softgrasp::harness {

/// Plant, five lock-step sensor nodes and a hub over loopback.
class LockstepStack {
 public:
  explicit LockstepStack(const ExperimentConfig& config);

  /// Resets the hand around `object` and re-references every sensor.
  void begin_trial(const sim::ObjectSpec& object, std::uint64_t seed);

  SimPlant plant;
  LocalSensorRig rig;
  hub::SensorHub hub;
};

std::string format_double(double value, int precision);
std::uint64_t trial_seed(std::uint64_t base, int object_id, int trial);
std::vector<sim::ObjectSpec> selected_objects(const ExperimentConfig& config);

}  // namespace softgrasp::harness
