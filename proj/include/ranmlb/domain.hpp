#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

namespace ranmlb {

using DuId = std::uint32_t;
using CellId = std::uint32_t;
using UeId = std::uint32_t;

/// Thrown when a sample would break the strictly-increasing timestamp order
/// of a RollingWindow.
struct OrderingError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Static per-cell radio parameters.
struct CellConfig {
  CellId cell_id = 0;
  DuId du_id = 0;
  std::uint64_t center_frequency_hz = 3'500'000'000;  // informational, band n78
  std::uint64_t bandwidth_hz = 20'000'000;
  std::uint32_t scs_hz = 30'000;
  std::uint32_t total_prbs = 51;

  void validate() const;  // throws std::invalid_argument

  friend bool operator==(const CellConfig&, const CellConfig&) = default;
};

/// One granularity-period load measurement for a DU.
/// Timestamps are logical milliseconds from run start, never wall clock.
struct LoadSample {
  std::uint64_t timestamp_ms = 0;
  double dl_prb_utilization_percent = 0.0;
  std::uint64_t mac_dl_buffer_volume_bits = 0;
  std::uint64_t dl_throughput_bps = 0;

  friend bool operator==(const LoadSample&, const LoadSample&) = default;
};

/// Per-UE slice of a measurement report.
struct UeMetric {
  UeId ue_id = 0;
  std::uint64_t buffer_bits = 0;
  std::uint64_t throughput_bps = 0;

  friend bool operator==(const UeMetric&, const UeMetric&) = default;
};

/// One granularity-period measurement report: DU-level load plus one entry
/// per attached UE.
struct KpmReport {
  DuId du_id = 0;
  std::uint64_t timestamp_ms = 0;
  double dl_prb_utilization_percent = 0.0;
  std::uint64_t mac_dl_buffer_volume_bits = 0;
  std::uint64_t dl_throughput_bps = 0;
  std::vector<UeMetric> ue_metrics;

  LoadSample du_sample() const {
    return LoadSample{timestamp_ms, dl_prb_utilization_percent,
                      mac_dl_buffer_volume_bits, dl_throughput_bps};
  }

  friend bool operator==(const KpmReport&, const KpmReport&) = default;
};

/// Percentage of PRB-slots used over a reporting period, averaged over the
/// period rather than sampled instantaneously.
/// Requires total_prbs > 0, num_slots > 0 and
/// used_prb_slots <= total_prbs * num_slots.
double prb_utilization(std::uint64_t used_prb_slots, std::uint32_t total_prbs,
                       std::uint64_t num_slots);

/// Time-bounded sample window. A pushed sample evicts everything older than
/// capacity_duration_ms relative to it, so the window covers the half-open
/// interval (newest - capacity, newest].
class RollingWindow {
 public:
  explicit RollingWindow(std::uint64_t capacity_duration_ms)
      : capacity_ms_(capacity_duration_ms) {}

  /// Appends a sample. Throws OrderingError unless its timestamp is strictly
  /// greater than the newest sample already held.
  void push(const LoadSample& sample);

  bool empty() const { return samples_.empty(); }
  std::size_t size() const { return samples_.size(); }
  const std::deque<LoadSample>& samples() const { return samples_; }
  const LoadSample& newest() const { return samples_.back(); }
  const LoadSample& oldest() const { return samples_.front(); }
  std::uint64_t capacity_duration_ms() const { return capacity_ms_; }
  std::uint64_t span_ms() const {
    return empty() ? 0 : newest().timestamp_ms - oldest().timestamp_ms;
  }

 private:
  std::uint64_t capacity_ms_;
  std::deque<LoadSample> samples_;
};

/// True iff the window holds at least k = duration_ms / granularity_ms
/// samples and the k most recent all satisfy pred. Counts samples, not wall
/// time: a reporting gap shrinks the window below k and breaks sustainment.
template <class Pred>
bool window_sustained(const RollingWindow& window, Pred&& pred,
                      std::uint64_t duration_ms, std::uint32_t granularity_ms) {
  if (granularity_ms == 0) {
    throw std::invalid_argument("window_sustained: granularity_ms must be > 0");
  }
  if (duration_ms == 0 || duration_ms % granularity_ms != 0) {
    throw std::invalid_argument(
        "window_sustained: duration_ms must be a positive multiple of granularity_ms");
  }
  const std::size_t k = static_cast<std::size_t>(duration_ms / granularity_ms);
  if (window.size() < k) {
    return false;
  }
  const auto& samples = window.samples();
  for (auto it = samples.end() - static_cast<std::ptrdiff_t>(k);
       it != samples.end(); ++it) {
    if (!pred(*it)) {
      return false;
    }
  }
  return true;
}

}  // namespace ranmlb
