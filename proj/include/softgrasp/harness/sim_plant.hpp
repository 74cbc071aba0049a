#pragma once

#include <array>
#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "softgrasp/control/run_loop.hpp"
#include "softgrasp/sim/hand.hpp"

namespace softgrasp::harness {

/// The simulated hand as a control-loop plant, plus its five fingertip cameras.
///
/// Keeps a simulation clock that never runs backwards across trials.  Sensor
/// node i captures at phase i * period / 5 + k * period within a trial; when a
/// capture hook is installed the plant calls it at those instants (lock-step
/// mode), otherwise the nodes pull frames on their own schedule.
class SimPlant final : public control::Plant {
 public:
  using CaptureHook = std::function<void(std::size_t sensor)>;

  SimPlant(sim::SimConfig config, std::uint64_t camera_seed, double capture_period_ms);

  /// Opens the hand around a new object (or none) and refreshes every camera.
  void reset(const sim::ObjectSpec* object, std::uint64_t seed);
  void set_capture_hook(CaptureHook hook) { hook_ = std::move(hook); }
  /// Pushes current forces to all cameras and fires the hook for each sensor.
  void capture_all();

  double encoder() const override { return hand_.motor_position; }
  double motor_current() const override { return hand_.motor_current; }
  void command(double position) override { command_ = position; }
  void advance(double dt) override;
  std::vector<std::string> take_events() override;

  void disturb(const sim::Disturbance& disturbance);
  bool holds() const { return sim::grip_holds(hand_, config_); }

  const sim::HandState& hand() const { return hand_; }
  const std::optional<sim::ObjectSpec>& object() const { return object_; }
  const sim::SimConfig& config() const { return config_; }
  sim::FingertipCamera& camera(std::size_t n) { return *cameras_.at(n); }

  /// Simulation time in milliseconds, monotonic across resets.
  double clock_ms() const { return now_ms_.load(std::memory_order_acquire); }
  double trial_time_s() const { return local_s_; }

 private:
  void publish_forces();

  sim::SimConfig config_;
  double capture_period_ms_;
  std::array<std::unique_ptr<sim::FingertipCamera>, sim::kFingerCount> cameras_;
  sim::HandState hand_;
  std::optional<sim::ObjectSpec> object_;
  std::uint64_t seed_ = 0;
  std::uint64_t disturbance_count_ = 0;
  double command_ = 0.0;
  double base_ms_ = 0.0;
  double local_s_ = 0.0;
  std::atomic<double> now_ms_{0.0};
  std::array<long long, sim::kFingerCount> last_capture_{};
  bool slip_reported_ = false;
  std::vector<std::string> events_;
  CaptureHook hook_;
};

}  // namespace softgrasp::harness
