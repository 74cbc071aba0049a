#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <optional>
#include <variant>

#include "softgrasp/sim/object_spec.hpp"
#include "softgrasp/tactile/image.hpp"
#include "softgrasp/util/kv_config.hpp"

namespace softgrasp::sim {

inline constexpr std::size_t kFingerCount = 5;

struct SimConfig {
  double u_max = 19000.0;  // encoder units at full closure
  /// Closure fraction per encoder unit, thumb first.
  std::array<double, kFingerCount> synergy_weights{1.15 / 19000.0, 1.05 / 19000.0,
                                                  1.0 / 19000.0, 1.02 / 19000.0,
                                                  1.1 / 19000.0};
  double motor_slew = 25000.0;       // encoder units per second
  double finger_travel_mm = 100.0;   // fingertip travel from open to fully closed
  double max_aperture_mm = 120.0;    // object size that touches at zero closure
  double hand_stiffness = 0.3;       // N/mm, finger compliance in series with the object
  double placement_jitter = 0.01;    // seeded per-trial contact closure jitter

  double current_per_force = 25.0;   // mA per newton of total fingertip force
  double elastic_link_gain = 600.0;  // mA at full closure beyond the knee
  double closure_knee = 0.8;

  int image_size = 64;
  int pin_grid = 6;
  double pin_sigma = 2.5;            // dot radius, pixels
  double pin_peak = 200.0;
  double background = 40.0;
  double pin_jitter = 0.1;           // per-pin displacement spread, fraction
  double force_to_displacement = 1.6;  // pixels per newton

  double reorientation_force_factor = 0.9;
  double slip_decay = 0.97;          // per step while slipping
  double slip_floor = 0.4;
  double friction = 0.5;
  double gravity = 9.81;
  double timestep = 1.0 / 286.0;

  /// Keys are the field names above; synergy weights as synergy_weight0..4.
  static SimConfig from_kv(const util::KvConfig& kv);
  /// Throws std::invalid_argument unless all gains are positive and pin_grid >= 3.
  void validate() const;
};

struct HandState {
  double motor_position = 0.0;  // encoder units
  std::array<double, kFingerCount> finger_closure{};
  std::array<double, kFingerCount> finger_force{};  // newtons
  std::array<bool, kFingerCount> contact_set{};
  double motor_current = 0.0;  // mA

  // Simulator internals.
  double command = 0.0;
  bool object_present = false;
  std::array<double, kFingerCount> contact_closure{};  // closure at which each finger meets the object
  std::array<double, kFingerCount> grip_force{};       // squeeze component of finger_force
  double orientation_rad = 0.0;  // 0 palm up, pi palm down
  double load_mass_g = 0.0;      // extra load carried by the object
  double reorientation_scale = 1.0;
  double slip_scale = 1.0;
  bool slip_decided = false;
  bool slipping = false;
};

/// Fresh open hand holding (or about to grasp) `object`.  The seed places the
/// object with a small per-finger jitter.
HandState initial_state(const ObjectSpec* object, const SimConfig& config, std::uint64_t seed);

/// Half-width of the per-finger spread of contact closures for a category:
/// irregular and elongated shapes meet the fingers less evenly.
double category_spread(Category category);

/// Closure at which each finger meets the object, before placement jitter.
std::array<double, kFingerCount> contact_closures(const ObjectSpec& object,
                                                  const SimConfig& config);

/// Advances the plant by dt.  Throws std::invalid_argument for a command outside
/// [0, u_max] or dt <= 0.
HandState step(const HandState& state, double command, const ObjectSpec* object,
               const SimConfig& config, double dt);

/// Synthetic fingertip camera frame for a given normal force.  Zero force gives
/// the reference image for every seed.
tactile::TactileImage render_tactile(double finger_force, const SimConfig& config,
                                     std::uint64_t noise_seed);

double motor_current(const HandState& state, const SimConfig& config);

struct Reorientation {
  double angle_rad = 0.0;  // absolute hand orientation, 0 palm up
};
struct AddedLoad {
  double mass_g = 0.0;
};
struct Release {};
using Disturbance = std::variant<Reorientation, AddedLoad, Release>;

HandState apply_disturbance(const HandState& state, const Disturbance& disturbance,
                            const ObjectSpec* object, const SimConfig& config,
                            std::uint64_t seed);

/// Whether friction at the fingertips still holds the carried load at the
/// current orientation.  Palm up the hand cradles it; palm down the grip
/// carries the full weight.  An object still resting on the table always holds.
bool grip_holds(const HandState& state, const SimConfig& config);

/// One fingertip camera: the plant writes the force, the sensor node pulls frames.
class FingertipCamera {
 public:
  FingertipCamera(const SimConfig& config, std::uint64_t seed) : config_(config), seed_(seed) {}

  void set_force(double newtons) { force_.store(newtons, std::memory_order_release); }
  double force() const { return force_.load(std::memory_order_acquire); }
  tactile::TactileImage capture() const { return render_tactile(force(), config_, seed_); }

 private:
  SimConfig config_;
  std::uint64_t seed_;
  std::atomic<double> force_{0.0};
};

}  // namespace softgrasp::sim
