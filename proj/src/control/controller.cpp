#include "softgrasp/control/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace softgrasp::control {

ControllerConfig ControllerConfig::from_kv(const util::KvConfig& kv) {
  ControllerConfig c;
  std::set<std::string> known;
  const auto num = [&](const char* key, double& field) {
    known.insert(key);
    field = kv.get_double(key, field);
  };
  num("setpoint", c.setpoint);
  num("contact_threshold", c.contact_threshold);
  num("u_max", c.u_max);
  num("closure_setpoint", c.closure_setpoint);
  num("kp_position", c.kp_position);
  num("kp_mu", c.kp_mu);
  num("ki_mu", c.ki_mu);
  num("integrator_limit", c.integrator_limit);
  num("slew_limit", c.slew_limit);
  num("tick_period", c.tick_period);
  num("settle_band", c.settle_band);
  num("dwell", c.dwell);
  num("staleness_limit_ms", c.staleness_limit_ms);
  known.insert("history_capacity");
  c.history_capacity = static_cast<std::size_t>(
      kv.get_int("history_capacity", static_cast<long long>(c.history_capacity)));
  kv.require_known(known);
  c.validate();
  return c;
}

ControllerConfig ControllerConfig::load(const std::filesystem::path& path) {
  return from_kv(util::KvConfig::load(path));
}

void ControllerConfig::validate() const {
  if (!(setpoint > 0.0 && setpoint < 1.0)) throw std::invalid_argument("setpoint must lie in (0, 1)");
  if (!(contact_threshold > 0.0 && contact_threshold < 1.0)) {
    throw std::invalid_argument("contact threshold must lie in (0, 1)");
  }
  if (!(u_max > 0.0)) throw std::invalid_argument("u_max must be positive");
  if (!(closure_setpoint >= 0.0 && closure_setpoint <= u_max)) {
    throw std::invalid_argument("closure setpoint must lie in [0, u_max]");
  }
  if (!(kp_position >= 0.0 && kp_mu >= 0.0 && ki_mu >= 0.0)) {
    throw std::invalid_argument("controller gains must be non-negative");
  }
  if (!(integrator_limit >= 0.0)) throw std::invalid_argument("integrator limit must be non-negative");
  if (!(slew_limit > 0.0)) throw std::invalid_argument("slew limit must be positive");
  if (!(tick_period > 0.0)) throw std::invalid_argument("tick period must be positive");
  if (!(settle_band > 0.0 && settle_band < 1.0)) throw std::invalid_argument("settle band must lie in (0, 1)");
  if (!(dwell >= 0.0)) throw std::invalid_argument("dwell must be non-negative");
  if (!(staleness_limit_ms > 0.0)) throw std::invalid_argument("staleness limit must be positive");
  if (history_capacity < 2) throw std::invalid_argument("history capacity must be at least 2");
}

int classify_state(const hub::DeformationVector& vector, const ControllerConfig& config) {
  return std::any_of(vector.deltas.begin(), vector.deltas.end(),
                     [&](double d) { return d > config.contact_threshold; })
             ? 1
             : 0;
}

bool settled(const ControllerState& state, const ControllerConfig& config) {
  if (!state.first_contact_s || state.mu_history.empty()) return false;
  const double first = *state.first_contact_s;
  const auto& h = state.mu_history;
  if (!config.in_band(h.back().mu) || h.back().t_s < first) return false;
  double run_start = h.back().t_s;
  for (auto it = h.rbegin(); it != h.rend(); ++it) {
    if (it->t_s < first || !config.in_band(it->mu)) break;
    run_start = it->t_s;
  }
  // Tolerance for accumulated tick times.
  return h.back().t_s - run_start >= config.dwell - 1e-9;
}

GraspController::GraspController(ControllerConfig config) : config_(config) {
  config_.validate();
}

void GraspController::reset(double initial_command) {
  state_ = ControllerState{};
  state_.last_command = std::clamp(initial_command, 0.0, config_.u_max);
}

StepOutput GraspController::step(const hub::DeformationVector& vector, double encoder_u,
                                 double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("controller step needs dt > 0");
  const double now = state_.time_s;
  state_.time_s += dt;

  StepOutput out;
  const bool stale = vector.stale || vector.max_age_ms > config_.staleness_limit_ms;
  state_.stale = stale;
  if (stale) {
    out.command = state_.last_command;
    out.epsilon = state_.epsilon;
    out.stale = true;
    return out;
  }

  const int eps = classify_state(vector, config_);
  out.switched = eps != state_.epsilon;
  if (eps == 1 && state_.epsilon == 0) {
    state_.bias = state_.last_command;
    state_.integrator = 0.0;
  }
  if (eps == 1 && !state_.first_contact_s) state_.first_contact_s = now;
  state_.epsilon = eps;

  state_.position_error = config_.closure_setpoint - encoder_u;
  state_.mu_error = config_.setpoint - vector.mean;
  state_.mu_history.push_back({now, vector.mean});
  while (state_.mu_history.size() > config_.history_capacity) state_.mu_history.pop_front();

  double raw = 0.0;
  if (eps == 0) {
    raw = state_.last_command + config_.kp_position * state_.position_error * dt;
  } else {
    state_.integrator = std::clamp(state_.integrator + config_.ki_mu * state_.mu_error * dt,
                                   -config_.integrator_limit, config_.integrator_limit);
    raw = state_.bias + config_.kp_mu * state_.mu_error + state_.integrator;
  }
  const double bound = config_.slew_bound(dt);
  double command = std::clamp(raw, state_.last_command - bound, state_.last_command + bound);
  command = std::clamp(command, 0.0, config_.u_max);

  state_.last_command = command;
  out.command = command;
  out.epsilon = eps;
  return out;
}

}  // namespace softgrasp::control
