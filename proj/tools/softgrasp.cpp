// Experiment harness: exp1 (gentle-grasp sweep), exp2 (handover), bench (loop rate).
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "softgrasp/harness/experiment.hpp"
#include "softgrasp/util/kv_config.hpp"

namespace {

using namespace softgrasp;

int print_checks(const std::vector<harness::Check>& checks) {
  for (const auto& c : checks) {
    std::printf("[%s] %s: %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
  }
  return harness::all_pass(checks) ? 0 : 1;
}

std::vector<net::Endpoint> parse_nodes(const std::string& list) {
  std::vector<net::Endpoint> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(net::Endpoint::parse(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tactile gentle-grasp experiments against the simulated hand"};
  app.require_subcommand(1, 1);

  harness::ExperimentConfig config;
  config.objects_path = std::filesystem::path(SOFTGRASP_DATA_DIR) / "objects.txt";
  config.poses_path = std::filesystem::path(SOFTGRASP_DATA_DIR) / "handover_poses.txt";
  std::string objects;
  std::string nodes;
  std::string config_path;
  std::string out_dir = "results";
  std::vector<int> only;
  bool local = false;
  bool no_plots = false;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--objects", objects, "Object set table");
    sub->add_option("--trials", config.trials_per_object, "Trials per object")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", config.seed, "Base seed");
    auto* local_flag = sub->add_flag("--local", local, "Run the five sensor nodes in-process");
    auto* nodes_opt = sub->add_option("--nodes", nodes, "host:port,... of five remote sensor nodes");
    local_flag->excludes(nodes_opt);
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--config", config_path, "key=value settings file");
    sub->add_option("--only", only, "Restrict to these object ids")->delimiter(',');
  };
  auto* exp1 = app.add_subcommand("exp1", "Gentle-grasp settling and peak current sweep");
  add_common(exp1);
  exp1->add_flag("--no-plots", no_plots, "Skip SVG output");
  auto* exp2 = app.add_subcommand("exp2", "Handover trials with scoring");
  add_common(exp2);
  std::string poses;
  exp2->add_option("--poses", poses, "Marker pose pairs");
  auto* bench = app.add_subcommand("bench", "Control-rate benchmark");
  add_common(bench);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) config.apply(util::KvConfig::load(config_path));
    if (!objects.empty()) config.objects_path = objects;
    if (!poses.empty()) config.poses_path = poses;
    config.output_dir = out_dir;
    config.object_filter = only;
    config.write_plots = config.write_plots && !no_plots;
    if (!nodes.empty()) {
      config.local = false;
      config.nodes = parse_nodes(nodes);
    }

    if (exp1->parsed()) {
      const auto report = harness::run_experiment1(config);
      std::printf("exp1: %zu trials in %.1f s, results in %s\n", report.trials.size(),
                  report.wall_s, config.output_dir.string().c_str());
      return print_checks(report.checks);
    }
    if (exp2->parsed()) {
      const auto report = harness::run_experiment2(config);
      double total = 0.0;
      for (const auto& t : report.trials) total += t.score.value_or(0.0);
      std::printf("exp2: %zu trials, %.1f points, results in %s\n", report.trials.size(), total,
                  config.output_dir.string().c_str());
      return print_checks(report.checks);
    }
    const auto report = harness::run_bench(config);
    for (const auto& r : report.runs) {
      std::printf("%-10s capture %.1f ms: %lld cycles in %.2f s (%.1f/s), p50 %.3f ms, p99 %.3f ms\n",
                  r.mode.c_str(), r.capture_period_ms, r.cycles, r.duration_s, r.rate_hz,
                  r.poll_p50_ms, r.poll_p99_ms);
    }
    std::printf("single LATEST read: %.3f ms\n", report.single_read_ms);
    return print_checks(report.checks);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "softgrasp: %s\n", e.what());
    return 2;
  }
}
