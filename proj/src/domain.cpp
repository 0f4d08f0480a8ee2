#include "ranmlb/domain.hpp"

#include <string>

namespace ranmlb {

void CellConfig::validate() const {
  if (total_prbs == 0) {
    throw std::invalid_argument("cell " + std::to_string(cell_id) +
                                ": total_prbs must be > 0");
  }
  if (scs_hz != 15'000 && scs_hz != 30'000 && scs_hz != 60'000) {
    throw std::invalid_argument("cell " + std::to_string(cell_id) +
                                ": scs_hz must be one of 15000, 30000, 60000");
  }
}

double prb_utilization(std::uint64_t used_prb_slots, std::uint32_t total_prbs,
                       std::uint64_t num_slots) {
  if (total_prbs == 0 || num_slots == 0) {
    throw std::invalid_argument("prb_utilization: denominator must be positive");
  }
  const std::uint64_t available = static_cast<std::uint64_t>(total_prbs) * num_slots;
  if (used_prb_slots > available) {
    throw std::invalid_argument("prb_utilization: used_prb_slots exceeds capacity");
  }
  return 100.0 * static_cast<double>(used_prb_slots) / static_cast<double>(available);
}

void RollingWindow::push(const LoadSample& sample) {
  if (!samples_.empty() && sample.timestamp_ms <= samples_.back().timestamp_ms) {
    throw OrderingError("RollingWindow: sample timestamps must be strictly increasing");
  }
  samples_.push_back(sample);
  // Keep only samples newer than (newest - capacity).
  while (samples_.size() > 1 &&
         samples_.front().timestamp_ms + capacity_ms_ <= samples_.back().timestamp_ms) {
    samples_.pop_front();
  }
}

}  // namespace ranmlb
