#include "softgrasp/harness/sim_plant.hpp"

#include <cmath>

#include "softgrasp/util/rng.hpp"

namespace softgrasp::harness {

SimPlant::SimPlant(sim::SimConfig config, std::uint64_t camera_seed, double capture_period_ms)
    : config_(std::move(config)), capture_period_ms_(capture_period_ms) {
  config_.validate();
  if (!(capture_period_ms_ > 0.0)) throw std::invalid_argument("capture period must be positive");
  for (std::size_t n = 0; n < cameras_.size(); ++n) {
    cameras_[n] = std::make_unique<sim::FingertipCamera>(config_, util::mix_seed(camera_seed, n));
  }
}

void SimPlant::reset(const sim::ObjectSpec* object, std::uint64_t seed) {
  // Leave one capture period between trials so node timestamps keep increasing.
  base_ms_ += local_s_ * 1000.0 + capture_period_ms_;
  local_s_ = 0.0;
  now_ms_.store(base_ms_, std::memory_order_release);

  if (object) {
    object_ = *object;
  } else {
    object_.reset();
  }
  seed_ = seed;
  disturbance_count_ = 0;
  hand_ = sim::initial_state(object_ ? &*object_ : nullptr, config_, seed);
  command_ = 0.0;
  slip_reported_ = false;
  events_.clear();
  capture_all();
}

void SimPlant::publish_forces() {
  for (std::size_t n = 0; n < cameras_.size(); ++n) cameras_[n]->set_force(hand_.finger_force[n]);
}

void SimPlant::capture_all() {
  publish_forces();
  last_capture_.fill(0);
  if (hook_) {
    for (std::size_t n = 0; n < cameras_.size(); ++n) hook_(n);
  }
}

void SimPlant::advance(double dt) {
  hand_ = sim::step(hand_, command_, object_ ? &*object_ : nullptr, config_, dt);
  if (hand_.slipping && !slip_reported_) {
    slip_reported_ = true;
    events_.emplace_back("slip");
  }
  local_s_ += dt;
  const double local_ms = local_s_ * 1000.0;
  now_ms_.store(base_ms_ + local_ms, std::memory_order_release);
  publish_forces();
  if (!hook_) return;
  const double phase_step = capture_period_ms_ / static_cast<double>(cameras_.size());
  for (std::size_t n = 0; n < cameras_.size(); ++n) {
    const auto k = static_cast<long long>(
        std::floor((local_ms - phase_step * static_cast<double>(n)) / capture_period_ms_));
    if (k > last_capture_[n]) {
      last_capture_[n] = k;
      hook_(n);
    }
  }
}

std::vector<std::string> SimPlant::take_events() {
  std::vector<std::string> out;
  out.swap(events_);
  return out;
}

void SimPlant::disturb(const sim::Disturbance& disturbance) {
  hand_ = sim::apply_disturbance(hand_, disturbance, object_ ? &*object_ : nullptr, config_,
                                 util::mix_seed(seed_, 1000 + disturbance_count_++));
  if (std::holds_alternative<sim::Release>(disturbance)) {
    object_.reset();
    publish_forces();
  }
}

}  // namespace softgrasp::harness
