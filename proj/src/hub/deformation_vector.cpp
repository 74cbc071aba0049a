#include "softgrasp/hub/deformation_vector.hpp"

#include <algorithm>

#include "softgrasp/tactile/ssim.hpp"

namespace softgrasp::hub {

DeformationVector assemble_vector(
    const std::array<std::optional<node::SensorSnapshot>, kSensorCount>& snapshots,
    const std::array<double, kSensorCount>& ages_ms, double contact_threshold,
    double stale_after_ms) {
  DeformationVector v;
  v.complete = true;
  double sum = 0.0;
  for (std::size_t n = 0; n < kSensorCount; ++n) {
    if (!snapshots[n]) {
      v.complete = false;
      continue;
    }
    v.deltas[n] = snapshots[n]->delta;
    v.seqs[n] = snapshots[n]->seq;
    v.contacts[n] = tactile::is_contact(v.deltas[n], contact_threshold);
    v.max_age_ms = std::max(v.max_age_ms, ages_ms[n]);
    sum += v.deltas[n];
  }
  v.mean = sum / static_cast<double>(kSensorCount);
  v.stale = v.max_age_ms > stale_after_ms;
  return v;
}

}  // namespace softgrasp::hub
