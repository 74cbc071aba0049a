#pragma once

#include <cstddef>
#include <deque>
#include <filesystem>
#include <optional>

#include "softgrasp/hub/deformation_vector.hpp"
#include "softgrasp/util/kv_config.hpp"

namespace softgrasp::control {

struct ControllerConfig {
  double setpoint = 0.5;  // target mean deformation
  double contact_threshold = 0.05;
  double u_max = 19000.0;
  double closure_setpoint = 19000.0;  // no-contact target: full closure
  double kp_position = 2.0;           // per second, on encoder error
  double kp_mu = 3000.0;              // encoder units per unit deformation error
  double ki_mu = 20000.0;             // encoder units per unit error-second
  double integrator_limit = 19000.0;
  double slew_limit = 25000.0;        // encoder units per second
  double tick_period = 1.0 / 286.0;   // seconds
  double settle_band = 0.05;          // relative to the setpoint
  double dwell = 0.5;                 // seconds inside the band before settled
  double staleness_limit_ms = 2.0 * 1000.0 / 30.0;
  std::size_t history_capacity = 2048;

  /// Largest command change allowed in one tick of length dt.
  double slew_bound(double dt) const { return slew_limit * dt; }
  double band_low() const { return setpoint * (1.0 - settle_band); }
  double band_high() const { return setpoint * (1.0 + settle_band); }
  bool in_band(double mu) const { return mu >= band_low() && mu <= band_high(); }

  /// Keys are the field names above.
  static ControllerConfig from_kv(const util::KvConfig& kv);
  static ControllerConfig load(const std::filesystem::path& path);
  /// Throws std::invalid_argument on a setpoint outside (0, 1), negative gains
  /// or a non-positive tick period.
  void validate() const;
};

struct MuSample {
  double t_s = 0.0;
  double mu = 0.0;
};

struct ControllerState {
  int epsilon = 0;            // 1 while any fingertip is in contact
  double integrator = 0.0;    // PI integral term, encoder units
  double bias = 0.0;          // PI output offset captured at the last 0 -> 1 switch
  double last_command = 0.0;  // encoder units
  double position_error = 0.0;
  double mu_error = 0.0;
  double time_s = 0.0;        // controller time of the next tick
  bool stale = false;         // last tick held on stale feedback
  std::optional<double> first_contact_s;
  std::deque<MuSample> mu_history;  // ring, oldest first
};

/// 1 if any sensor reports deformation above the contact threshold (strict).
int classify_state(const hub::DeformationVector& vector, const ControllerConfig& config);

/// True once the trailing run of in-band mean-deformation samples, counted
/// from first contact, spans at least the dwell time.
bool settled(const ControllerState& state, const ControllerConfig& config);

struct StepOutput {
  double command = 0.0;
  int epsilon = 0;
  bool switched = false;  // epsilon changed on this tick
  bool stale = false;
};

/// Switching controller.  Without contact it drives the motor toward full
/// closure with a proportional increment on encoder error; with contact it runs
/// PI on the mean deformation around the setpoint.  Both errors are tracked on
/// every tick.  Entering contact seeds the PI output with the last command, and
/// every command is rate-limited and clamped to [0, u_max].
class GraspController {
 public:
  explicit GraspController(ControllerConfig config = {});

  StepOutput step(const hub::DeformationVector& vector, double encoder_u, double dt);
  void reset(double initial_command = 0.0);

  const ControllerState& state() const { return state_; }
  const ControllerConfig& config() const { return config_; }
  bool settled() const { return control::settled(state_, config_); }

 private:
  ControllerConfig config_;
  ControllerState state_;
};

}  // namespace softgrasp::control
