#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "softgrasp/harness/experiment.hpp"

namespace softgrasp::harness {

void ExperimentConfig::apply(const util::KvConfig& kv) {
  util::KvConfig controller_kv;
  util::KvConfig sim_kv;
  util::KvConfig own;
  for (const auto& [key, value] : kv.values()) {
    if (key.rfind("controller.", 0) == 0) {
      controller_kv.set(key.substr(11), value);
    } else if (key.rfind("sim.", 0) == 0) {
      sim_kv.set(key.substr(4), value);
    } else {
      own.set(key, value);
    }
  }
  if (!controller_kv.values().empty()) controller = control::ControllerConfig::from_kv(controller_kv);
  if (!sim_kv.values().empty()) sim = sim::SimConfig::from_kv(sim_kv);

  std::set<std::string> known;
  const auto num = [&](const char* key, double& field) {
    known.insert(key);
    field = own.get_double(key, field);
  };
  num("capture_period_ms", capture_period_ms);
  num("grasp_timeout_s", grasp_timeout_s);
  num("post_settle_s", post_settle_s);
  num("settle_limit_s", settle_limit_s);
  num("gentle_current_ma", gentle_current_ma);
  num("pass_fraction", pass_fraction);
  num("wrist_offset_dy", wrist_offset.dy);
  num("wrist_offset_dz", wrist_offset.dz);
  num("glove_offset_dz", glove_offset.dz);
  num("approach_speed_mm_s", approach_speed_mm_s);
  num("lift_s", lift_s);
  num("rotate_s", rotate_s);
  num("hold_s", hold_s);
  num("grasp_post_settle_s", grasp_post_settle_s);
  num("bench_duration_s", bench_duration_s);
  num("bench_tick_s", bench_tick_s);
  num("sequential_duration_s", sequential_duration_s);
  num("required_tick_rate_hz", required_tick_rate_hz);
  num("decoupling_tolerance", decoupling_tolerance);
  known.insert("poses");
  if (auto p = own.get("poses")) poses_path = *p;
  known.insert("write_plots");
  write_plots = own.get_int("write_plots", write_plots ? 1 : 0) != 0;
  own.require_known(known);
}

void ExperimentConfig::validate(Mode mode) const {
  if (trials_per_object < 1) throw std::invalid_argument("trials per object must be at least 1");
  controller.validate();
  sim.validate();
  if (!(capture_period_ms > 0.0)) throw std::invalid_argument("capture period must be positive");
  if (!local && mode != Mode::Bench) {
    throw std::invalid_argument("remote sensor nodes are only supported in bench mode");
  }
  if (!local && nodes.size() != 5) throw std::invalid_argument("--nodes needs exactly five endpoints");
  if (mode != Mode::Bench && objects_path.empty()) throw std::invalid_argument("no object set given");
  if (mode == Mode::Exp2 && poses_path.empty()) throw std::invalid_argument("no handover pose file given");
  if (!(grasp_timeout_s > 0.0 && post_settle_s >= 0.0 && settle_limit_s > 0.0)) {
    throw std::invalid_argument("experiment durations must be positive");
  }
  if (!(pass_fraction > 0.0 && pass_fraction <= 1.0)) throw std::invalid_argument("pass fraction must lie in (0, 1]");
  if (!(approach_speed_mm_s > 0.0)) throw std::invalid_argument("approach speed must be positive");
  if (!(lift_s >= 0.0 && rotate_s > 0.0 && hold_s >= 0.0)) throw std::invalid_argument("carry phases must be non-negative");
  if (!(bench_duration_s > 0.0 && bench_tick_s > 0.0 && sequential_duration_s > 0.0)) {
    throw std::invalid_argument("bench durations must be positive");
  }
}

bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

double percentile(std::vector<double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("percentile of an empty sample");
  std::sort(samples.begin(), samples.end());
  const double rank = std::ceil(std::clamp(q, 0.0, 1.0) * static_cast<double>(samples.size()));
  const auto idx = static_cast<std::size_t>(std::max(1.0, rank)) - 1;
  return samples[idx];
}

const std::vector<Scenario>& handover_scenarios() {
  static const std::vector<Scenario> scenarios = {
      {5, "nominal", 1.0},
      {9, "heavy-overload", 0.0},
      {40, "slip-but-lands", 0.5},
  };
  return scenarios;
}

}  // namespace softgrasp::harness
