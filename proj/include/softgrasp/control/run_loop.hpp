#pragma once

#include <array>
#include <atomic>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "softgrasp/control/controller.hpp"
#include "softgrasp/hub/deformation_vector.hpp"

namespace softgrasp::control {

/// What the control loop drives: a real or simulated single-motor hand.
class Plant {
 public:
  virtual ~Plant() = default;
  virtual double encoder() const = 0;         // encoder units
  virtual double motor_current() const = 0;   // mA
  virtual void command(double position) = 0;  // encoder units
  /// Moves plant time forward by dt (a simulated plant integrates; a real one may ignore it).
  virtual void advance(double dt) = 0;
  /// Events raised by the plant since the last call, e.g. a slip.
  virtual std::vector<std::string> take_events() { return {}; }
};

struct TickRecord {
  double t_s = 0.0;
  double mu = 0.0;
  std::array<double, hub::kSensorCount> deltas{};
  int epsilon = 0;
  double command = 0.0;
  double encoder = 0.0;
  double current_ma = 0.0;
  std::string event;  // ';'-separated, empty for most ticks
};

enum class StopReason { Settled, Timeout, External };

struct RunRecord {
  std::vector<TickRecord> ticks;
  std::optional<double> first_contact_s;
  std::optional<double> settled_at_s;  // tick at which the controller first reported settled
  StopReason stop_reason = StopReason::Timeout;

  double peak_current_ma() const;
};

struct RunOptions {
  enum class Pacing { Simulated, RealTime };
  Pacing pacing = Pacing::Simulated;
  double max_duration_s = 8.0;
  bool stop_on_settle = true;
  double post_settle_s = 1.0;  // keep recording this long after settling
  const std::atomic<bool>* stop = nullptr;
  /// Called after each recorded tick; returning false ends the run.
  std::function<bool(const TickRecord&, const GraspController&)> on_tick;
};

/// Ticks the loop: read feedback, step the controller, command and advance
/// the plant, record.  The first read propagates NotReadyError.
RunRecord run_loop(hub::FeedbackSource& feedback, Plant& plant, GraspController& controller,
                   const RunOptions& options);

/// Time from first contact to the start of the final in-band run, provided
/// that run reaches the end of the record and lasts at least the dwell.
std::optional<double> settle_time(const RunRecord& record, const ControllerConfig& config);

/// Largest one-tick command change across an epsilon transition.
double max_switch_jump(const RunRecord& record);

/// CSV with header t_s,mu,d0,d1,d2,d3,d4,epsilon,command,encoder,current_mA,event.
void write_run_csv(const RunRecord& record, const std::filesystem::path& path);
/// Throws std::runtime_error on a malformed file.
RunRecord read_run_csv(const std::filesystem::path& path);

}  // namespace softgrasp::control
