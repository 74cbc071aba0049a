// One fingertip sensor service.
#include <CLI11.hpp>

#include <csignal>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

#include "softgrasp/node/sensor_node.hpp"
#include "softgrasp/sim/hand.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }

// Repeating press: rest, ramp up, hold, release.
double press_force(double t_s) {
  constexpr double kCycle = 6.0;
  constexpr double kPeak = 3.0;
  const double t = std::fmod(t_s, kCycle);
  if (t < 1.0) return 0.0;
  if (t < 3.0) return kPeak * (t - 1.0) / 2.0;
  if (t < 4.5) return kPeak;
  if (t < 5.0) return kPeak * (5.0 - t) / 0.5;
  return 0.0;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace softgrasp;
  CLI::App app{"Fingertip tactile sensor node"};
  node::NodeConfig config;
  std::string listen = "127.0.0.1:0";
  std::string source = "sim";
  std::string replay_dir;
  app.add_option("--id", config.sensor_id, "Sensor id, 0-4")->required()->check(CLI::Range(0, 4));
  app.add_option("--listen", listen, "host:port to listen on");
  app.add_option("--period-ms", config.capture_period_ms, "Capture period")->check(CLI::PositiveNumber);
  app.add_option("--threshold", config.contact_threshold, "Contact threshold on deformation");
  app.add_option("--source", source, "Frame source")->check(CLI::IsMember({"sim", "replay"}));
  app.add_option("--replay-dir", replay_dir, "Directory of PGM frames for --source replay");
  CLI11_PARSE(app, argc, argv);

  try {
    config.listen = net::Endpoint::parse(listen);
    std::unique_ptr<node::FrameSource> frames;
    if (source == "replay") {
      if (replay_dir.empty()) throw std::invalid_argument("--source replay needs --replay-dir");
      config.frame_source = node::FrameSourceKind::Replay;
      frames = std::make_unique<node::ReplayFrameSource>(replay_dir);
    } else {
      const sim::SimConfig sim_config;
      const auto start = std::chrono::steady_clock::now();
      const auto seed = static_cast<std::uint64_t>(config.sensor_id);
      frames = std::make_unique<node::CallbackFrameSource>(
          [sim_config, start, seed]() -> std::optional<tactile::TactileImage> {
            const double t =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            return sim::render_tactile(press_force(t), sim_config, seed);
          });
    }
    node::SensorNode sensor(config, std::move(frames));
    sensor.start();
    std::printf("sensor %d listening on %s\n", config.sensor_id, sensor.endpoint().str().c_str());
    std::fflush(stdout);

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    sensor.stop();
    std::printf("sensor %d: %llu frame errors\n", config.sensor_id,
                static_cast<unsigned long long>(sensor.error_count()));
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "softgrasp_node: %s\n", e.what());
    return 2;
  }
}
