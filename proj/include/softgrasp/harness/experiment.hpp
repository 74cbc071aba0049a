#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "softgrasp/control/controller.hpp"
#include "softgrasp/handover/pose.hpp"
#include "softgrasp/net/socket.hpp"
#include "softgrasp/sim/hand.hpp"
#include "softgrasp/sim/object_spec.hpp"

namespace softgrasp::harness {

enum class Mode { Exp1, Exp2, Bench };

struct ExperimentConfig {
  std::filesystem::path objects_path;
  std::filesystem::path poses_path;  // handover marker poses, two per trial
  int trials_per_object = 5;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "results";
  bool local = true;
  std::vector<net::Endpoint> nodes;  // remote sensor nodes when not local
  std::vector<int> object_filter;    // empty: every object in the set

  control::ControllerConfig controller{};
  sim::SimConfig sim{};
  double capture_period_ms = 1000.0 / 30.0;

  // Experiment 1.
  double grasp_timeout_s = 8.0;
  double post_settle_s = 1.0;
  double settle_limit_s = 3.0;
  double gentle_current_ma = 350.0;
  double pass_fraction = 0.95;
  bool write_plots = true;

  // Experiment 2.
  handover::PlanarOffset wrist_offset{-40.0, 60.0};
  handover::PlanarOffset glove_offset{0.0, 50.0};
  double approach_speed_mm_s = 250.0;
  double lift_s = 0.5;
  double rotate_s = 1.5;
  double hold_s = 0.5;
  double grasp_post_settle_s = 0.2;

  // Benchmark.
  double bench_duration_s = 10.0;
  double bench_tick_s = 0.002;
  double sequential_duration_s = 3.0;
  double required_tick_rate_hz = 286.0;
  double decoupling_tolerance = 0.10;

  /// Applies a key=value file.  Keys prefixed `controller.` and `sim.` go to
  /// the controller and simulator; the rest are the fields above.
  void apply(const util::KvConfig& kv);
  /// Throws std::invalid_argument on inconsistent settings.
  void validate(Mode mode) const;
};

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

bool all_pass(const std::vector<Check>& checks);

struct TrialResult {
  int object_id = 0;
  sim::Category category = sim::Category::Rigid;
  int trial = 0;
  bool settled = false;
  std::optional<double> settle_time_s;
  double pmc_ma = 0.0;
  double max_switch_jump = 0.0;
  std::string run_record;  // path relative to the output directory
  // Experiment 2 only.
  std::optional<double> score;
  std::string failure_mode;
};

struct Exp1Report {
  std::vector<TrialResult> trials;
  std::vector<Check> checks;
  double wall_s = 0.0;
};

struct Exp2Report {
  std::vector<TrialResult> trials;
  std::vector<Check> checks;
};

struct BenchRun {
  std::string mode;  // concurrent, sequential
  double capture_period_ms = 0.0;
  double duration_s = 0.0;
  long long cycles = 0;
  double rate_hz = 0.0;
  double poll_p50_ms = 0.0;
  double poll_p99_ms = 0.0;
  double poll_max_ms = 0.0;
};

struct BenchReport {
  std::vector<BenchRun> runs;
  double single_read_ms = 0.0;  // median LATEST round trip to one node
  std::vector<Check> checks;
};

/// Gentle-grasp sweep: every object x trial, settle and peak current.  Writes
/// exp1_results.csv, exp1_pmc_summary.csv, runs/ and plots/ under output_dir.
Exp1Report run_experiment1(const ExperimentConfig& config);

/// Handover trials with carry, reorientation and release.  Writes
/// exp2_trials.csv (one row per trial), exp2_results.csv (per-object totals)
/// and runs/.
Exp2Report run_experiment2(const ExperimentConfig& config);

/// Control-rate benchmark against live sensor nodes.  Writes bench.csv.
BenchReport run_bench(const ExperimentConfig& config);

/// Expected per-trial score of the scripted handover scenarios, by object id.
struct Scenario {
  int object_id;
  std::string name;
  double expected_score;
};
const std::vector<Scenario>& handover_scenarios();

/// Nearest-rank percentile of unsorted samples, q in [0, 1].  Throws
/// std::invalid_argument for an empty sample.
double percentile(std::vector<double> samples, double q);

}  // namespace softgrasp::harness
