#include <algorithm>
#include <cmath>
#include <chrono>
#include <fstream>
#include <thread>

#include "lockstep.hpp"
#include "softgrasp/control/run_loop.hpp"
#include "softgrasp/harness/experiment.hpp"
#include "softgrasp/harness/sensor_rig.hpp"
#include "softgrasp/hub/sensor_hub.hpp"
#include "softgrasp/util/errors.hpp"
#include "softgrasp/util/rng.hpp"

namespace softgrasp::harness {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// Times every read of the wrapped source.
class TimedFeedback final : public hub::FeedbackSource {
 public:
  explicit TimedFeedback(hub::FeedbackSource& inner) : inner_(inner) {}
  hub::DeformationVector read() override {
    const auto start = Clock::now();
    auto v = inner_.read();
    samples_ms.push_back(ms_since(start));
    return v;
  }
  std::vector<double> samples_ms;

 private:
  hub::FeedbackSource& inner_;
};

std::optional<sim::ObjectSpec> bench_object(const ExperimentConfig& config) {
  if (config.objects_path.empty() || !std::filesystem::exists(config.objects_path)) return std::nullopt;
  const auto objects = sim::load_object_set(config.objects_path);
  const int nominal = handover_scenarios().front().object_id;
  for (const auto& o : objects) {
    if (o.object_id == nominal) return o;
  }
  return objects.empty() ? std::nullopt : std::optional(objects.front());
}

/// Waits until every node has published a frame, then references all of them.
void reference_when_ready(hub::SensorHub& hub) {
  const auto deadline = Clock::now() + std::chrono::seconds(3);
  for (;;) {
    try {
      const auto v = hub.poll();
      if (v.complete && std::all_of(v.seqs.begin(), v.seqs.end(), [](auto s) { return s > 0; })) {
        hub.set_all_references();
        return;
      }
    } catch (const NotReadyError&) {
    } catch (const hub::ReferenceError&) {
    }
    if (Clock::now() > deadline) throw std::runtime_error("sensor nodes did not become ready");
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
}

BenchRun concurrent_run(hub::SensorHub& hub, SimPlant& plant, const ExperimentConfig& config,
                        double capture_period_ms) {
  control::ControllerConfig cc = config.controller;
  cc.tick_period = config.bench_tick_s;
  cc.staleness_limit_ms = 2.0 * capture_period_ms;
  control::GraspController controller(cc);
  TimedFeedback timed(hub);
  control::RunOptions options;
  options.pacing = control::RunOptions::Pacing::RealTime;
  options.max_duration_s = config.bench_duration_s;
  options.stop_on_settle = false;

  const auto start = Clock::now();
  const auto record = control::run_loop(timed, plant, controller, options);
  const double wall_s = ms_since(start) / 1000.0;

  BenchRun run;
  run.mode = "concurrent";
  run.capture_period_ms = capture_period_ms;
  run.duration_s = wall_s;
  run.cycles = static_cast<long long>(record.ticks.size());
  run.rate_hz = static_cast<double>(run.cycles) / wall_s;
  run.poll_p50_ms = percentile(timed.samples_ms, 0.50);
  run.poll_p99_ms = percentile(timed.samples_ms, 0.99);
  run.poll_max_ms = percentile(timed.samples_ms, 1.0);
  return run;
}

BenchRun sequential_run(hub::SensorHub& hub, const ExperimentConfig& config,
                        double capture_period_ms) {
  std::vector<double> cycles;
  const auto start = Clock::now();
  const auto per_node = std::chrono::milliseconds(static_cast<int>(4 * capture_period_ms) + 10);
  while (ms_since(start) < config.sequential_duration_s * 1000.0) {
    const auto t0 = Clock::now();
    hub.poll_sequential_fresh(per_node);
    cycles.push_back(ms_since(t0));
  }
  BenchRun run;
  run.mode = "sequential";
  run.capture_period_ms = capture_period_ms;
  run.duration_s = ms_since(start) / 1000.0;
  run.cycles = static_cast<long long>(cycles.size());
  run.rate_hz = static_cast<double>(run.cycles) / run.duration_s;
  run.poll_p50_ms = percentile(cycles, 0.50);
  run.poll_p99_ms = percentile(cycles, 0.99);
  run.poll_max_ms = percentile(cycles, 1.0);
  return run;
}

double single_read_ms(const net::Endpoint& endpoint) {
  auto socket = net::connect_tcp(endpoint, std::chrono::milliseconds(500));
  if (!socket.valid()) throw std::runtime_error("cannot reach sensor node " + endpoint.str());
  net::set_nodelay(socket.fd());
  net::LineBuffer buffer(256);
  std::vector<double> samples;
  for (int i = 0; i < 200; ++i) {
    const auto t0 = Clock::now();
    if (!net::request_line(socket.fd(), "LATEST\n", buffer, std::chrono::milliseconds(500))) {
      throw std::runtime_error("sensor node " + endpoint.str() + " did not answer LATEST");
    }
    samples.push_back(ms_since(t0));
  }
  return percentile(samples, 0.5);
}

void write_bench_csv(const BenchReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "mode,capture_period_ms,duration_s,cycles,rate_hz,p50_ms,p99_ms,max_ms\n";
  for (const auto& r : report.runs) {
    out << r.mode << ',' << format_double(r.capture_period_ms, 3) << ','
        << format_double(r.duration_s, 3) << ',' << r.cycles << ',' << format_double(r.rate_hz, 2)
        << ',' << format_double(r.poll_p50_ms, 4) << ',' << format_double(r.poll_p99_ms, 4) << ','
        << format_double(r.poll_max_ms, 4) << '\n';
  }
  out << "single_read,,,,," << format_double(report.single_read_ms, 4) << ",,\n";
}

}  // namespace

BenchReport run_bench(const ExperimentConfig& config) {
  config.validate(Mode::Bench);
  std::filesystem::create_directories(config.output_dir);
  const auto object = bench_object(config);
  BenchReport report;

  if (config.local) {
    for (double period : {config.capture_period_ms, 2.0 * config.capture_period_ms}) {
      SimPlant plant(config.sim, util::mix_seed(config.seed, 0xBE7C), period);
      plant.reset(object ? &*object : nullptr, config.seed);
      LocalSensorRig rig(plant, RigOptions{false, period, config.controller.contact_threshold});
      hub::SensorHub hub(rig.hub_config());
      hub.connect();
      reference_when_ready(hub);
      report.runs.push_back(concurrent_run(hub, plant, config, period));
      if (period == config.capture_period_ms) {
        report.runs.push_back(sequential_run(hub, config, period));
        report.single_read_ms = single_read_ms(rig.hub_config().endpoints[0]);
      }
    }
  } else {
    hub::HubConfig hc;
    for (std::size_t n = 0; n < hub::kSensorCount; ++n) hc.endpoints[n] = config.nodes[n];
    hc.contact_threshold = config.controller.contact_threshold;
    SimPlant plant(config.sim, config.seed, config.capture_period_ms);
    plant.reset(nullptr, config.seed);
    hub::SensorHub hub(hc);
    hub.connect();
    reference_when_ready(hub);
    report.runs.push_back(concurrent_run(hub, plant, config, config.capture_period_ms));
    report.runs.push_back(sequential_run(hub, config, config.capture_period_ms));
    report.single_read_ms = single_read_ms(hc.endpoints[0]);
  }
  write_bench_csv(report, config.output_dir / "bench.csv");

  std::vector<const BenchRun*> concurrent;
  const BenchRun* sequential = nullptr;
  for (const auto& r : report.runs) {
    if (r.mode == "concurrent") concurrent.push_back(&r);
    if (r.mode == "sequential") sequential = &r;
  }
  for (const auto* r : concurrent) {
    report.checks.push_back({"tick rate at " + format_double(r->capture_period_ms, 1) + " ms capture",
                             r->rate_hz >= config.required_tick_rate_hz,
                             format_double(r->rate_hz, 1) + " ticks/s over " +
                                 format_double(r->duration_s, 1) + " s, poll p99 " +
                                 format_double(r->poll_p99_ms, 3) + " ms"});
  }
  if (concurrent.size() == 2) {
    const double change = std::abs(concurrent[1]->rate_hz - concurrent[0]->rate_hz) / concurrent[0]->rate_hz;
    report.checks.push_back({"decoupling", change < config.decoupling_tolerance,
                             "tick rate changed " + format_double(100.0 * change, 2) +
                                 "% when the capture period doubled"});
  }
  if (sequential) {
    report.checks.push_back({"sequential penalty",
                             sequential->poll_p50_ms > 5.0 * report.single_read_ms,
                             "sequential fresh cycle " + format_double(sequential->poll_p50_ms, 2) +
                                 " ms vs single read " + format_double(report.single_read_ms, 3) +
                                 " ms"});
  }
  return report;
}

}  // namespace softgrasp::harness
