#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>

#include "softgrasp/node/snapshot.hpp"

namespace softgrasp::hub {

inline constexpr std::size_t kSensorCount = 5;

/// Per-tick controller feedback assembled from the five fingertip sensors.
struct DeformationVector {
  std::array<double, kSensorCount> deltas{};
  double mean = 0.0;  // sum(deltas) / 5
  std::array<bool, kSensorCount> contacts{};
  std::array<std::uint64_t, kSensorCount> seqs{};
  double max_age_ms = 0.0;  // oldest snapshot age among the sensors that have answered
  bool complete = false;    // every sensor has answered at least once
  bool stale = false;       // max_age_ms above the hub's staleness threshold
};

/// Builds the vector from the latest snapshot of each sensor (nullopt for a
/// sensor that never answered, which contributes delta 0).  Contacts are
/// re-derived with `contact_threshold`.
DeformationVector assemble_vector(
    const std::array<std::optional<node::SensorSnapshot>, kSensorCount>& snapshots,
    const std::array<double, kSensorCount>& ages_ms, double contact_threshold,
    double stale_after_ms);

/// Anything the control loop can read a deformation vector from.
class FeedbackSource {
 public:
  virtual ~FeedbackSource() = default;
  virtual DeformationVector read() = 0;
};

}  // namespace softgrasp::hub
