#include "softgrasp/handover/scoring.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace softgrasp::handover {

namespace {

constexpr std::array<std::pair<TrialEvent, std::string_view>, 5> kEvents{{
    {TrialEvent::Settled, "settled"},
    {TrialEvent::Slip, "slip"},
    {TrialEvent::ReleasedInBin, "released_in_bin"},
    {TrialEvent::ObjectLost, "object_lost"},
    {TrialEvent::Timeout, "timeout"},
}};

bool terminal(TrialEvent e) {
  return e == TrialEvent::ReleasedInBin || e == TrialEvent::ObjectLost || e == TrialEvent::Timeout;
}

}  // namespace

std::string_view to_string(TrialEvent event) {
  for (const auto& [e, name] : kEvents) {
    if (e == event) return name;
  }
  return "unknown";
}

TrialEvent parse_trial_event(std::string_view name) {
  for (const auto& [e, n] : kEvents) {
    if (n == name) return e;
  }
  throw std::invalid_argument("unknown trial event '" + std::string(name) + "'");
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Success: return "success";
    case Outcome::Partial: return "partial";
    case Outcome::Failure: return "failure";
  }
  return "unknown";
}

TrialScore score_trial(const std::vector<TimedEvent>& events) {
  const auto end = std::find_if(events.begin(), events.end(),
                                [](const TimedEvent& e) { return terminal(e.event); });
  if (end == events.end()) throw std::invalid_argument("trial event log has no terminal event");
  const auto seen = [&](TrialEvent kind) {
    return std::any_of(events.begin(), end, [&](const TimedEvent& e) { return e.event == kind; });
  };
  if (end->event != TrialEvent::ReleasedInBin || !seen(TrialEvent::Settled)) {
    return {0.0, Outcome::Failure};
  }
  if (seen(TrialEvent::Slip)) return {0.5, Outcome::Partial};
  return {1.0, Outcome::Success};
}

void write_event_log(const std::vector<TimedEvent>& events, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write event log " + path.string());
  out << "t_s,event\n";
  char buf[64];
  for (const auto& e : events) {
    std::snprintf(buf, sizeof buf, "%.6f,", e.t_s);
    out << buf << to_string(e.event) << '\n';
  }
}

std::vector<TimedEvent> read_event_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open event log " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "t_s,event") {
    throw std::runtime_error("event log " + path.string() + " has an unexpected header");
  }
  std::vector<TimedEvent> events;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("event log: malformed line '" + line + "'");
    TimedEvent e;
    try {
      e.t_s = std::stod(line.substr(0, comma));
    } catch (const std::exception&) {
      throw std::runtime_error("event log: bad time in '" + line + "'");
    }
    e.event = parse_trial_event(line.substr(comma + 1));
    events.push_back(e);
  }
  return events;
}

}  // namespace softgrasp::handover
