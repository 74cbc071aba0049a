#include "softgrasp/sim/hand.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "softgrasp/util/rng.hpp"

namespace softgrasp::sim {

namespace {

// Five pseudo-random values in [-1, 1] fixed by the object id, so an object
// always meets the fingers in the same uneven way.
std::array<double, kFingerCount> finger_offsets(int object_id) {
  std::uint32_t s = static_cast<std::uint32_t>(object_id) * 2654435761u;
  std::array<double, kFingerCount> out{};
  for (auto& v : out) {
    s = 1664525u * s + 1013904223u;
    v = static_cast<double>(s) / 4294967296.0 * 2.0 - 1.0;
  }
  return out;
}

double effective_stiffness(const ObjectSpec& object, const SimConfig& config) {
  return 1.0 / (1.0 / object.stiffness_n_per_mm + 1.0 / config.hand_stiffness);
}

void positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string("sim config: ") + name + " must be positive");
  }
}

}  // namespace

SimConfig SimConfig::from_kv(const util::KvConfig& kv) {
  SimConfig c;
  std::set<std::string> known;
  const auto num = [&](const char* key, double& field) {
    known.insert(key);
    field = kv.get_double(key, field);
  };
  const auto integer = [&](const char* key, int& field) {
    known.insert(key);
    field = static_cast<int>(kv.get_int(key, field));
  };
  num("u_max", c.u_max);
  for (std::size_t i = 0; i < kFingerCount; ++i) {
    const std::string key = "synergy_weight" + std::to_string(i);
    known.insert(key);
    c.synergy_weights[i] = kv.get_double(key, c.synergy_weights[i]);
  }
  num("motor_slew", c.motor_slew);
  num("finger_travel_mm", c.finger_travel_mm);
  num("max_aperture_mm", c.max_aperture_mm);
  num("hand_stiffness", c.hand_stiffness);
  num("placement_jitter", c.placement_jitter);
  num("current_per_force", c.current_per_force);
  num("elastic_link_gain", c.elastic_link_gain);
  num("closure_knee", c.closure_knee);
  integer("image_size", c.image_size);
  integer("pin_grid", c.pin_grid);
  num("pin_sigma", c.pin_sigma);
  num("pin_peak", c.pin_peak);
  num("background", c.background);
  num("pin_jitter", c.pin_jitter);
  num("force_to_displacement", c.force_to_displacement);
  num("reorientation_force_factor", c.reorientation_force_factor);
  num("slip_decay", c.slip_decay);
  num("slip_floor", c.slip_floor);
  num("friction", c.friction);
  num("gravity", c.gravity);
  num("timestep", c.timestep);
  kv.require_known(known);
  c.validate();
  return c;
}

void SimConfig::validate() const {
  positive(u_max, "u_max");
  for (double w : synergy_weights) positive(w, "synergy weight");
  positive(motor_slew, "motor_slew");
  positive(finger_travel_mm, "finger_travel_mm");
  positive(max_aperture_mm, "max_aperture_mm");
  positive(hand_stiffness, "hand_stiffness");
  positive(current_per_force, "current_per_force");
  positive(elastic_link_gain, "elastic_link_gain");
  positive(closure_knee, "closure_knee");
  positive(pin_sigma, "pin_sigma");
  positive(pin_peak, "pin_peak");
  positive(force_to_displacement, "force_to_displacement");
  positive(reorientation_force_factor, "reorientation_force_factor");
  positive(slip_decay, "slip_decay");
  positive(slip_floor, "slip_floor");
  positive(friction, "friction");
  positive(gravity, "gravity");
  positive(timestep, "timestep");
  if (placement_jitter < 0.0) throw std::invalid_argument("sim config: negative placement jitter");
  if (pin_jitter < 0.0 || pin_jitter >= 1.0) {
    throw std::invalid_argument("sim config: pin_jitter must lie in [0, 1)");
  }
  if (closure_knee >= 1.0) throw std::invalid_argument("sim config: closure_knee must be < 1");
  if (slip_decay > 1.0 || slip_floor > 1.0) {
    throw std::invalid_argument("sim config: slip decay and floor must not exceed 1");
  }
  if (pin_grid < 3) throw std::invalid_argument("sim config: pin_grid must be at least 3");
  if (image_size < 8) throw std::invalid_argument("sim config: image_size must be at least 8");
  if (background < 0.0 || background > 255.0) {
    throw std::invalid_argument("sim config: background out of range");
  }
}

double category_spread(Category category) {
  switch (category) {
    case Category::Soft: return 0.015;
    case Category::Fruit: return 0.02;
    case Category::Rigid: return 0.03;
    case Category::Small: return 0.03;
    case Category::Long: return 0.04;
  }
  return 0.03;
}

std::array<double, kFingerCount> contact_closures(const ObjectSpec& object,
                                                  const SimConfig& config) {
  const auto offsets = finger_offsets(object.object_id);
  const double base = 1.0 - object.size_mm / config.max_aperture_mm;
  std::array<double, kFingerCount> out{};
  for (std::size_t i = 0; i < kFingerCount; ++i) {
    out[i] = std::max(0.0, base + category_spread(object.category) * offsets[i]);
  }
  return out;
}

HandState initial_state(const ObjectSpec* object, const SimConfig& config, std::uint64_t seed) {
  HandState s;
  if (object == nullptr) return s;
  object->validate();
  s.object_present = true;
  s.contact_closure = contact_closures(*object, config);
  util::Rng rng(seed);
  for (auto& c : s.contact_closure) {
    c = std::max(0.0, c + rng.uniform(-config.placement_jitter, config.placement_jitter));
  }
  return s;
}

HandState step(const HandState& state, double command, const ObjectSpec* object,
               const SimConfig& config, double dt) {
  if (!(command >= 0.0 && command <= config.u_max)) {
    throw std::invalid_argument("motor command " + std::to_string(command) +
                                " outside [0, u_max]");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");

  HandState next = state;
  next.command = command;
  const double max_move = config.motor_slew * dt;
  next.motor_position =
      std::clamp(state.motor_position + std::clamp(command - state.motor_position, -max_move,
                                                   max_move),
                 0.0, config.u_max);
  if (next.slipping) next.slip_scale = std::max(config.slip_floor, next.slip_scale * config.slip_decay);

  const bool holding = next.object_present && object != nullptr;
  const double k_eff = holding ? effective_stiffness(*object, config) : 0.0;
  std::size_t touching = 0;
  for (std::size_t i = 0; i < kFingerCount; ++i) {
    const double commanded = std::min(1.0, config.synergy_weights[i] * next.motor_position);
    if (!holding) {
      next.finger_closure[i] = commanded;
      next.grip_force[i] = 0.0;
      continue;
    }
    const double limit = next.contact_closure[i];
    next.finger_closure[i] = std::min(commanded, limit);
    const double penetration_mm = std::max(0.0, commanded - limit) * config.finger_travel_mm;
    next.grip_force[i] = k_eff * penetration_mm * next.reorientation_scale * next.slip_scale;
    if (next.grip_force[i] > 0.0) ++touching;
  }

  // The carried load rests on the fingertips while the palm faces up.
  double load_share = 0.0;
  if (holding && touching > 0) {
    const double weight = next.load_mass_g / 1000.0 * config.gravity;
    load_share = weight * std::max(0.0, std::cos(next.orientation_rad)) /
                 static_cast<double>(touching);
  }
  for (std::size_t i = 0; i < kFingerCount; ++i) {
    next.finger_force[i] = next.grip_force[i] > 0.0 ? next.grip_force[i] + load_share : 0.0;
    next.contact_set[i] = next.finger_force[i] > 0.0;
  }
  next.motor_current = motor_current(next, config);
  return next;
}

double motor_current(const HandState& state, const SimConfig& config) {
  double total = 0.0;
  for (double f : state.finger_force) total += std::max(0.0, f);
  const double closure = state.motor_position / config.u_max;
  return config.current_per_force * total +
         config.elastic_link_gain * std::max(0.0, closure - config.closure_knee);
}

tactile::TactileImage render_tactile(double finger_force, const SimConfig& config,
                                     std::uint64_t noise_seed) {
  const int n = config.image_size;
  const double size = static_cast<double>(n);
  const double spacing = size / config.pin_grid;
  const double centre = size / 2.0;
  const double sigma = config.pin_sigma;
  const double reach = 4.0 * sigma;
  const double displacement = config.force_to_displacement * std::max(0.0, finger_force);

  std::vector<double> acc(static_cast<std::size_t>(n) * n, config.background);
  std::vector<double> gx, gy;
  util::Rng rng(noise_seed);
  for (int row = 0; row < config.pin_grid; ++row) {
    for (int col = 0; col < config.pin_grid; ++col) {
      double px = (col + 0.5) * spacing;
      double py = (row + 0.5) * spacing;
      const double jitter = 1.0 + config.pin_jitter * (2.0 * rng.uniform() - 1.0);
      const double r = std::hypot(px - centre, py - centre);
      if (displacement > 0.0 && r > 0.0) {
        const double d = displacement * jitter;
        px = std::clamp(px + d * (px - centre) / r, 0.0, size);
        py = std::clamp(py + d * (py - centre) / r, 0.0, size);
      }
      const int x0 = std::max(0, static_cast<int>(std::floor(px - reach)));
      const int x1 = std::min(n - 1, static_cast<int>(std::ceil(px + reach)));
      const int y0 = std::max(0, static_cast<int>(std::floor(py - reach)));
      const int y1 = std::min(n - 1, static_cast<int>(std::ceil(py + reach)));
      gx.assign(static_cast<std::size_t>(x1 - x0 + 1), 0.0);
      gy.assign(static_cast<std::size_t>(y1 - y0 + 1), 0.0);
      for (int x = x0; x <= x1; ++x) {
        const double dx = x + 0.5 - px;
        gx[x - x0] = std::exp(-dx * dx / (2.0 * sigma * sigma));
      }
      for (int y = y0; y <= y1; ++y) {
        const double dy = y + 0.5 - py;
        gy[y - y0] = config.pin_peak * std::exp(-dy * dy / (2.0 * sigma * sigma));
      }
      for (int y = y0; y <= y1; ++y) {
        double* line = acc.data() + static_cast<std::size_t>(y) * n;
        for (int x = x0; x <= x1; ++x) line[x] += gy[y - y0] * gx[x - x0];
      }
    }
  }
  for (auto& v : acc) v = std::clamp(std::round(v), 0.0, 255.0);
  return tactile::TactileImage(n, n, std::move(acc), 255.0);
}

HandState apply_disturbance(const HandState& state, const Disturbance& disturbance,
                            const ObjectSpec* object, const SimConfig& config,
                            std::uint64_t seed) {
  HandState next = state;
  if (std::holds_alternative<Release>(disturbance)) {
    next.object_present = false;
    next.load_mass_g = 0.0;
    next.slipping = false;
    next.grip_force.fill(0.0);
    next.finger_force.fill(0.0);
    next.contact_set.fill(false);
    for (std::size_t i = 0; i < kFingerCount; ++i) {
      next.finger_closure[i] = std::min(1.0, config.synergy_weights[i] * next.motor_position);
    }
    next.motor_current = motor_current(next, config);
  } else if (const auto* load = std::get_if<AddedLoad>(&disturbance)) {
    if (!(load->mass_g >= 0.0)) throw std::invalid_argument("added load must be non-negative");
    next.load_mass_g += load->mass_g;
  } else if (const auto* turn = std::get_if<Reorientation>(&disturbance)) {
    next.orientation_rad = turn->angle_rad;
    if (turn->angle_rad != 0.0) {
      next.reorientation_scale = config.reorientation_force_factor;
      if (!next.slip_decided && next.object_present && object != nullptr) {
        next.slip_decided = true;
        util::Rng rng(seed);
        next.slipping = rng.uniform() < 1.0 - object->slip_coefficient;
      }
    }
  }
  return next;
}

bool grip_holds(const HandState& state, const SimConfig& config) {
  if (!state.object_present) return false;
  if (state.load_mass_g <= 0.0) return true;  // still supported by the table
  double squeeze = 0.0;
  bool touching = false;
  for (std::size_t i = 0; i < kFingerCount; ++i) {
    squeeze += state.grip_force[i];
    touching = touching || state.contact_set[i];
  }
  if (!touching) return false;
  const double weight = state.load_mass_g / 1000.0 * config.gravity;
  return config.friction * squeeze >= weight * (1.0 - std::cos(state.orientation_rad)) / 2.0;
}

}  // namespace softgrasp::sim
