#include "softgrasp/control/run_loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace softgrasp::control {

namespace {

constexpr const char* kHeader = "t_s,mu,d0,d1,d2,d3,d4,epsilon,command,encoder,current_mA,event";

void add_event(std::string& events, const std::string& e) {
  if (!events.empty()) events += ';';
  events += e;
}

}  // namespace

double RunRecord::peak_current_ma() const {
  double peak = 0.0;
  for (const auto& t : ticks) peak = std::max(peak, t.current_ma);
  return peak;
}

RunRecord run_loop(hub::FeedbackSource& feedback, Plant& plant, GraspController& controller,
                   const RunOptions& options) {
  const ControllerConfig& config = controller.config();
  const double dt = config.tick_period;
  RunRecord record;
  const auto start = std::chrono::steady_clock::now();
  const auto period = std::chrono::duration<double>(dt);
  const auto total_ticks = static_cast<long long>(std::ceil(options.max_duration_s / dt - 1e-9));

  for (long long k = 0; k < total_ticks; ++k) {
    if (options.stop && options.stop->load()) {
      record.stop_reason = StopReason::External;
      return record;
    }
    const double t = static_cast<double>(k) * dt;
    const hub::DeformationVector vector = feedback.read();
    const StepOutput out = controller.step(vector, plant.encoder(), dt);
    plant.command(out.command);
    plant.advance(dt);

    TickRecord tick;
    tick.t_s = t;
    tick.mu = vector.mean;
    tick.deltas = vector.deltas;
    tick.epsilon = out.epsilon;
    tick.command = out.command;
    tick.encoder = plant.encoder();
    tick.current_ma = plant.motor_current();
    if (out.switched) add_event(tick.event, out.epsilon == 1 ? "contact" : "contact_lost");
    if (out.stale) add_event(tick.event, "stale");
    for (const auto& e : plant.take_events()) add_event(tick.event, e);
    if (out.switched && out.epsilon == 1 && !record.first_contact_s) record.first_contact_s = t;
    if (!record.settled_at_s && controller.settled()) {
      record.settled_at_s = t;
      add_event(tick.event, "settled");
    }
    record.ticks.push_back(std::move(tick));

    if (options.on_tick && !options.on_tick(record.ticks.back(), controller)) {
      record.stop_reason = StopReason::External;
      return record;
    }
    if (options.stop_on_settle && record.settled_at_s &&
        t >= *record.settled_at_s + options.post_settle_s - 1e-9) {
      record.stop_reason = StopReason::Settled;
      return record;
    }
    if (options.pacing == RunOptions::Pacing::RealTime) {
      std::this_thread::sleep_until(
          start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(period * (k + 1)));
    }
  }
  record.stop_reason = StopReason::Timeout;
  return record;
}

std::optional<double> settle_time(const RunRecord& record, const ControllerConfig& config) {
  if (!record.first_contact_s || record.ticks.empty()) return std::nullopt;
  const double first = *record.first_contact_s;
  const auto& ticks = record.ticks;
  if (!config.in_band(ticks.back().mu)) return std::nullopt;
  std::size_t i = ticks.size() - 1;
  while (i > 0 && ticks[i - 1].t_s >= first && config.in_band(ticks[i - 1].mu)) --i;
  if (ticks[i].t_s < first) return std::nullopt;
  if (ticks.back().t_s - ticks[i].t_s < config.dwell - 1e-9) return std::nullopt;
  return ticks[i].t_s - first;
}

double max_switch_jump(const RunRecord& record) {
  double worst = 0.0;
  for (std::size_t i = 1; i < record.ticks.size(); ++i) {
    if (record.ticks[i].epsilon != record.ticks[i - 1].epsilon) {
      worst = std::max(worst, std::abs(record.ticks[i].command - record.ticks[i - 1].command));
    }
  }
  return worst;
}

void write_run_csv(const RunRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write run record " + path.string());
  out << kHeader << '\n';
  char buf[512];
  for (const auto& t : record.ticks) {
    std::snprintf(buf, sizeof buf, "%.6f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%d,%.6f,%.6f,%.6f,",
                  t.t_s, t.mu, t.deltas[0], t.deltas[1], t.deltas[2], t.deltas[3], t.deltas[4],
                  t.epsilon, t.command, t.encoder, t.current_ma);
    out << buf << t.event << '\n';
  }
  if (!out) throw std::runtime_error("error writing run record " + path.string());
}

RunRecord read_run_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open run record " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw std::runtime_error("run record " + path.string() + " has an unexpected header");
  }
  RunRecord record;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 12) {
      throw std::runtime_error("run record line " + std::to_string(line_no) + ": expected 12 columns");
    }
    TickRecord t;
    try {
      t.t_s = std::stod(cells[0]);
      t.mu = std::stod(cells[1]);
      for (std::size_t n = 0; n < hub::kSensorCount; ++n) t.deltas[n] = std::stod(cells[2 + n]);
      t.epsilon = std::stoi(cells[7]);
      t.command = std::stod(cells[8]);
      t.encoder = std::stod(cells[9]);
      t.current_ma = std::stod(cells[10]);
    } catch (const std::exception&) {
      throw std::runtime_error("run record line " + std::to_string(line_no) + ": bad number");
    }
    if (t.epsilon != 0 && t.epsilon != 1) {
      throw std::runtime_error("run record line " + std::to_string(line_no) + ": bad epsilon");
    }
    if (!record.ticks.empty() && t.t_s <= record.ticks.back().t_s) {
      throw std::runtime_error("run record line " + std::to_string(line_no) + ": time not increasing");
    }
    t.event = cells[11];
    if (t.event.find("contact") != std::string::npos && t.epsilon == 1 && !record.first_contact_s) {
      record.first_contact_s = t.t_s;
    }
    if (t.event.find("settled") != std::string::npos && !record.settled_at_s) {
      record.settled_at_s = t.t_s;
    }
    record.ticks.push_back(std::move(t));
  }
  return record;
}

}  // namespace softgrasp::control
