#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>

#include "lockstep.hpp"
#include "softgrasp/control/run_loop.hpp"
#include "softgrasp/harness/experiment.hpp"
#include "softgrasp/harness/plots.hpp"

namespace softgrasp::harness {

namespace {

constexpr sim::Category kCategoryOrder[] = {sim::Category::Soft, sim::Category::Fruit,
                                             sim::Category::Rigid, sim::Category::Small,
                                             sim::Category::Long};

bool mode_matches_vector(const control::RunRecord& record, double threshold) {
  for (const auto& t : record.ticks) {
    const bool any = std::any_of(t.deltas.begin(), t.deltas.end(),
                                 [&](double d) { return d > threshold; });
    if (any != (t.epsilon == 1) && t.event.find("stale") == std::string::npos) return false;
  }
  return true;
}

void write_results(const std::vector<TrialResult>& trials, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "object_id,category,trial,settled,settle_time_s,pmc_mA,max_switch_jump,run_record\n";
  for (const auto& r : trials) {
    out << r.object_id << ',' << sim::to_string(r.category) << ',' << r.trial << ','
        << (r.settled ? 1 : 0) << ','
        << (r.settle_time_s ? format_double(*r.settle_time_s, 6) : std::string()) << ','
        << format_double(r.pmc_ma, 3) << ',' << format_double(r.max_switch_jump, 6) << ','
        << r.run_record << '\n';
  }
}

void write_summary(const std::vector<TrialResult>& trials, double settle_limit,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "category,trials,mean_pmc_mA,min_pmc_mA,max_pmc_mA,settled_fraction\n";
  for (auto cat : kCategoryOrder) {
    std::vector<double> pmc;
    int settled = 0;
    for (const auto& r : trials) {
      if (r.category != cat) continue;
      pmc.push_back(r.pmc_ma);
      if (r.settle_time_s && *r.settle_time_s <= settle_limit) ++settled;
    }
    if (pmc.empty()) continue;
    double sum = 0.0;
    for (double p : pmc) sum += p;
    out << sim::to_string(cat) << ',' << pmc.size() << ','
        << format_double(sum / static_cast<double>(pmc.size()), 3) << ','
        << format_double(*std::min_element(pmc.begin(), pmc.end()), 3) << ','
        << format_double(*std::max_element(pmc.begin(), pmc.end()), 3) << ','
        << format_double(static_cast<double>(settled) / static_cast<double>(pmc.size()), 4)
        << '\n';
  }
}

double category_mean(const std::vector<TrialResult>& trials, sim::Category cat, int& count) {
  double sum = 0.0;
  count = 0;
  for (const auto& r : trials) {
    if (r.category == cat) {
      sum += r.pmc_ma;
      ++count;
    }
  }
  return count ? sum / count : 0.0;
}

}  // namespace

Exp1Report run_experiment1(const ExperimentConfig& config) {
  config.validate(Mode::Exp1);
  const auto objects = selected_objects(config);
  const auto wall_start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(config.output_dir / "runs");

  LockstepStack stack(config);
  Exp1Report report;
  const double slew_bound = config.controller.slew_bound(config.controller.tick_period);
  bool modes_consistent = true;

  for (const auto& object : objects) {
    for (int trial = 1; trial <= config.trials_per_object; ++trial) {
      stack.begin_trial(object, trial_seed(config.seed, object.object_id, trial));
      control::GraspController controller(config.controller);
      control::RunOptions options;
      options.max_duration_s = config.grasp_timeout_s;
      options.post_settle_s = config.post_settle_s;
      const auto record = control::run_loop(stack.hub, stack.plant, controller, options);

      TrialResult r;
      r.object_id = object.object_id;
      r.category = object.category;
      r.trial = trial;
      r.settle_time_s = control::settle_time(record, config.controller);
      r.settled = r.settle_time_s.has_value();
      r.pmc_ma = record.peak_current_ma();
      r.max_switch_jump = control::max_switch_jump(record);
      char name[64];
      std::snprintf(name, sizeof name, "runs/exp1_obj%02d_trial%d.csv", object.object_id, trial);
      r.run_record = name;
      control::write_run_csv(record, config.output_dir / r.run_record);
      modes_consistent = modes_consistent &&
                         mode_matches_vector(record, config.controller.contact_threshold);
      report.trials.push_back(std::move(r));
    }
  }

  write_results(report.trials, config.output_dir / "exp1_results.csv");
  write_summary(report.trials, config.settle_limit_s, config.output_dir / "exp1_pmc_summary.csv");
  if (config.write_plots) {
    emit_plots(report.trials, config.output_dir, config.controller);
  }

  const double n = static_cast<double>(report.trials.size());
  const auto count = [&](auto pred) {
    return static_cast<double>(std::count_if(report.trials.begin(), report.trials.end(), pred));
  };
  const double settled = count([&](const TrialResult& r) {
    return r.settle_time_s && *r.settle_time_s <= config.settle_limit_s;
  });
  const double gentle = count([&](const TrialResult& r) { return r.pmc_ma < config.gentle_current_ma; });
  const double jumps = count([&](const TrialResult& r) { return r.max_switch_jump > slew_bound + 1e-9; });

  report.checks.push_back({"settling", settled / n >= config.pass_fraction,
                           format_double(100.0 * settled / n, 1) + "% settled within " +
                               format_double(config.settle_limit_s, 1) + " s"});
  report.checks.push_back({"gentle current", gentle / n >= config.pass_fraction,
                           format_double(100.0 * gentle / n, 1) + "% below " +
                               format_double(config.gentle_current_ma, 0) + " mA"});
  int soft_n = 0;
  int rigid_n = 0;
  const double soft = category_mean(report.trials, sim::Category::Soft, soft_n);
  const double rigid = category_mean(report.trials, sim::Category::Rigid, rigid_n);
  if (soft_n > 0 && rigid_n > 0) {
    report.checks.push_back({"soft below rigid", soft < rigid,
                             "soft " + format_double(soft, 1) + " mA, rigid " +
                                 format_double(rigid, 1) + " mA"});
  }
  report.checks.push_back({"bumpless switching", jumps == 0.0,
                           format_double(jumps, 0) + " trials with a switch jump above " +
                               format_double(slew_bound, 3)});
  report.checks.push_back({"mode correctness", modes_consistent,
                           modes_consistent ? "epsilon matches the contact flags on every tick"
                                            : "epsilon disagrees with the contact flags"});
  report.wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return report;
}

}  // namespace softgrasp::harness
