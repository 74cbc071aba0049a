#include "lockstep.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "softgrasp/util/rng.hpp"

namespace softgrasp::harness {

LockstepStack::LockstepStack(const ExperimentConfig& config)
    : plant(config.sim, util::mix_seed(config.seed, 0xC0FFEE), config.capture_period_ms),
      rig(plant, RigOptions{true, config.capture_period_ms, config.controller.contact_threshold}),
      hub(rig.hub_config(), [this] { return plant.clock_ms(); }) {
  hub.connect();
  if (hub.live_count() != hub::kSensorCount) {
    throw std::runtime_error("only " + std::to_string(hub.live_count()) +
                             " of 5 local sensor nodes answered");
  }
}

void LockstepStack::begin_trial(const sim::ObjectSpec& object, std::uint64_t seed) {
  plant.reset(&object, seed);
  hub.set_all_references();
}

std::string format_double(double value, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, value);
  return buf;
}

std::uint64_t trial_seed(std::uint64_t base, int object_id, int trial) {
  return util::mix_seed(base, static_cast<std::uint64_t>(object_id) * 1000u +
                                  static_cast<std::uint64_t>(trial));
}

std::vector<sim::ObjectSpec> selected_objects(const ExperimentConfig& config) {
  auto objects = sim::load_object_set(config.objects_path);
  if (!config.object_filter.empty()) {
    std::vector<sim::ObjectSpec> kept;
    for (int id : config.object_filter) kept.push_back(sim::find_object(objects, id));
    objects = std::move(kept);
  }
  if (objects.empty()) throw std::runtime_error("object set is empty");
  return objects;
}

}  // namespace softgrasp::harness
