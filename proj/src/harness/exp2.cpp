#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "lockstep.hpp"
#include "softgrasp/control/run_loop.hpp"
#include "softgrasp/handover/scoring.hpp"
#include "softgrasp/harness/experiment.hpp"

namespace softgrasp::harness {

namespace {

using handover::TrialEvent;

struct HandoverTrial {
  TrialResult result;
  double goal_mm = 0.0;
  double approach_s = 0.0;
  std::vector<handover::TimedEvent> events;
  control::RunRecord record;
};

void append_shifted(control::RunRecord& into, const control::RunRecord& from, double offset) {
  for (auto tick : from.ticks) {
    tick.t_s += offset;
    into.ticks.push_back(std::move(tick));
  }
}

HandoverTrial run_handover(LockstepStack& stack, const ExperimentConfig& config,
                           const sim::ObjectSpec& object, int trial,
                           const std::vector<handover::Pose>& poses) {
  HandoverTrial out;
  out.result.object_id = object.object_id;
  out.result.category = object.category;
  out.result.trial = trial;

  const std::size_t pair = static_cast<std::size_t>(trial - 1) % (poses.size() / 2);
  const Eigen::Vector3d goal = handover::solve_goal(poses[2 * pair], poses[2 * pair + 1],
                                                    config.wrist_offset, config.glove_offset);
  out.goal_mm = goal.norm();
  out.approach_s = out.goal_mm / config.approach_speed_mm_s;

  stack.begin_trial(object, trial_seed(config.seed, object.object_id, trial));
  control::GraspController controller(config.controller);
  const double dt = config.controller.tick_period;

  control::RunOptions grasp;
  grasp.max_duration_s = config.grasp_timeout_s;
  grasp.post_settle_s = config.grasp_post_settle_s;
  const auto grasp_record = control::run_loop(stack.hub, stack.plant, controller, grasp);
  out.record = grasp_record;
  out.result.pmc_ma = grasp_record.peak_current_ma();
  out.result.settle_time_s = control::settle_time(grasp_record, config.controller);
  const double grasp_end = out.approach_s + static_cast<double>(grasp_record.ticks.size()) * dt;

  if (!grasp_record.settled_at_s) {
    out.events.push_back({grasp_end, TrialEvent::Timeout});
    out.result.failure_mode = "never_settled";
  } else {
    out.result.settled = true;
    out.events.push_back({out.approach_s + *grasp_record.settled_at_s, TrialEvent::Settled});

    stack.plant.disturb(sim::AddedLoad{object.mass_g});
    bool lost = false;
    double lost_at = 0.0;
    double peak_mu = 0.0;
    control::RunOptions carry;
    carry.stop_on_settle = false;
    carry.max_duration_s = config.lift_s + config.rotate_s + config.hold_s;
    carry.on_tick = [&](const control::TickRecord& tick, const control::GraspController&) {
      peak_mu = std::max(peak_mu, tick.mu);
      if (!stack.plant.holds()) {
        lost = true;
        lost_at = tick.t_s + dt;
        stack.plant.disturb(sim::Release{});
        return false;
      }
      const double next = tick.t_s + dt;
      const double progress = std::clamp((next - config.lift_s) / config.rotate_s, 0.0, 1.0);
      stack.plant.disturb(sim::Reorientation{std::numbers::pi * progress});
      return true;
    };
    const auto carry_record = control::run_loop(stack.hub, stack.plant, controller, carry);
    const double carry_start = static_cast<double>(grasp_record.ticks.size()) * dt;
    append_shifted(out.record, carry_record, carry_start);
    out.result.pmc_ma = std::max(out.result.pmc_ma, carry_record.peak_current_ma());

    bool slipped = false;
    for (const auto& tick : carry_record.ticks) {
      if (tick.event.find("slip") != std::string::npos) {
        slipped = true;
        out.events.push_back({grasp_end + tick.t_s, TrialEvent::Slip});
      }
    }
    if (lost) {
      out.events.push_back({grasp_end + lost_at, TrialEvent::ObjectLost});
      if (peak_mu > config.controller.band_high()) {
        out.result.failure_mode = "overload_release";
      } else {
        out.result.failure_mode = slipped ? "slip_lost" : "grip_lost";
      }
    } else {
      const double carried = static_cast<double>(carry_record.ticks.size()) * dt;
      stack.plant.disturb(sim::Release{});
      out.events.push_back({grasp_end + carried, TrialEvent::ReleasedInBin});
    }
  }
  const auto score = handover::score_trial(out.events);
  out.result.score = score.value;
  return out;
}

}  // namespace

Exp2Report run_experiment2(const ExperimentConfig& config) {
  config.validate(Mode::Exp2);
  const auto objects = selected_objects(config);
  const auto poses = handover::load_poses(config.poses_path);
  if (poses.size() < 2 || poses.size() % 2 != 0) {
    throw std::runtime_error("handover pose file needs pairs of poses (wrist marker, glove marker)");
  }
  std::filesystem::create_directories(config.output_dir / "runs");

  LockstepStack stack(config);
  Exp2Report report;
  std::ofstream trials_csv(config.output_dir / "exp2_trials.csv");
  if (!trials_csv) throw std::runtime_error("cannot write exp2_trials.csv");
  trials_csv << "object_id,category,trial,score,outcome,failure_mode,goal_mm,approach_s,"
                "settle_time_s,pmc_mA,event_log,run_record\n";

  for (const auto& object : objects) {
    for (int trial = 1; trial <= config.trials_per_object; ++trial) {
      auto h = run_handover(stack, config, object, trial, poses);
      char stem[64];
      std::snprintf(stem, sizeof stem, "runs/exp2_obj%02d_trial%d", object.object_id, trial);
      h.result.run_record = std::string(stem) + ".csv";
      const std::string events_path = std::string(stem) + "_events.csv";
      control::write_run_csv(h.record, config.output_dir / h.result.run_record);
      handover::write_event_log(h.events, config.output_dir / events_path);
      const auto score = handover::score_trial(h.events);
      trials_csv << object.object_id << ',' << sim::to_string(object.category) << ',' << trial
                 << ',' << format_double(score.value, 1) << ',' << handover::to_string(score.outcome)
                 << ',' << h.result.failure_mode << ',' << format_double(h.goal_mm, 3) << ','
                 << format_double(h.approach_s, 3) << ','
                 << (h.result.settle_time_s ? format_double(*h.result.settle_time_s, 6) : "")
                 << ',' << format_double(h.result.pmc_ma, 3) << ',' << events_path << ','
                 << h.result.run_record << '\n';
      report.trials.push_back(std::move(h.result));
    }
  }

  std::ofstream totals(config.output_dir / "exp2_results.csv");
  if (!totals) throw std::runtime_error("cannot write exp2_results.csv");
  totals << "object_id,category,trials,total,out_of,trial_scores\n";
  for (const auto& object : objects) {
    double total = 0.0;
    std::string scores;
    int count = 0;
    for (const auto& r : report.trials) {
      if (r.object_id != object.object_id) continue;
      total += *r.score;
      if (!scores.empty()) scores += ';';
      scores += format_double(*r.score, 1);
      ++count;
    }
    totals << object.object_id << ',' << sim::to_string(object.category) << ',' << count << ','
           << format_double(total, 1) << ',' << count << ',' << scores << '\n';
  }

  for (const auto& scenario : handover_scenarios()) {
    std::vector<double> got;
    for (const auto& r : report.trials) {
      if (r.object_id == scenario.object_id) got.push_back(*r.score);
    }
    if (got.empty()) continue;
    const bool pass = std::all_of(got.begin(), got.end(),
                                  [&](double s) { return s == scenario.expected_score; });
    std::string detail = "object " + std::to_string(scenario.object_id) + " scores";
    for (double s : got) detail += " " + format_double(s, 1);
    detail += ", expected " + format_double(scenario.expected_score, 1) + " each";
    report.checks.push_back({"handover " + scenario.name, pass, detail});
  }
  return report;
}

}  // namespace softgrasp::harness
