#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

namespace softgrasp::handover {

enum class TrialEvent { Settled, Slip, ReleasedInBin, ObjectLost, Timeout };

std::string_view to_string(TrialEvent event);
/// Throws std::invalid_argument outside the vocabulary
/// {settled, slip, released_in_bin, object_lost, timeout}.
TrialEvent parse_trial_event(std::string_view name);

struct TimedEvent {
  double t_s = 0.0;
  TrialEvent event = TrialEvent::Settled;
};

enum class Outcome { Success, Partial, Failure };

struct TrialScore {
  double value = 0.0;  // 1, 0.5 or 0
  Outcome outcome = Outcome::Failure;
};

std::string_view to_string(Outcome outcome);

/// 1 for a slip-free deposit in the bin, 0.5 when the object slipped but still
/// landed in the bin, 0 when it was lost or the grasp never stabilised.  Throws
/// std::invalid_argument if the log has no terminal event (released_in_bin,
/// object_lost or timeout).
TrialScore score_trial(const std::vector<TimedEvent>& events);

/// CSV with header `t_s,event`.
void write_event_log(const std::vector<TimedEvent>& events, const std::filesystem::path& path);
std::vector<TimedEvent> read_event_log(const std::filesystem::path& path);

}  // namespace softgrasp::handover
