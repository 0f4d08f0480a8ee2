#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "ranmlb/events.hpp"
#include "ranmlb/ransim.hpp"
#include "ranmlb/scenario.hpp"

namespace ranmlb::harness {

struct DuMetricRow {
  std::uint64_t time_ms = 0;
  DuId du_id = 0;
  double prb_util_percent = 0.0;
  std::uint64_t buffer_bits = 0;
  std::uint64_t throughput_bps = 0;
};

struct UeMetricRow {
  std::uint64_t time_ms = 0;
  UeId ue_id = 0;
  DuId serving_du = 0;
  std::uint64_t buffer_bits = 0;
  std::uint64_t throughput_bps = 0;
};

struct HandoverRecord {
  std::uint32_t control_id = 0;
  UeId ue_id = 0;
  DuId source_du = 0;
  DuId target_du = 0;
  std::uint64_t time_us = 0;
};

struct UeAccounting {
  std::uint64_t arrived_bits = 0;
  std::uint64_t served_bits = 0;
  std::uint64_t dropped_bits = 0;
  std::uint64_t final_buffer_bits = 0;
  std::uint64_t arrival_carry = 0;  // sub-bit remainder, always < 1e6 bit-us
  DuId final_du = 0;
};

struct RunArtifacts {
  std::uint64_t duration_ms = 0;
  std::uint64_t seed = 0;
  std::vector<DuMetricRow> du_metrics;   // ordered by (time, du)
  std::vector<UeMetricRow> ue_metrics;   // ordered by (time, reporting du)
  EventLog events;
  std::vector<sim::SlotRecord> slot_records;  // populated when slot recording is on
  std::vector<HandoverRecord> handovers;      // HO_COMPLETED events, in order
  std::map<UeId, UeAccounting> per_ue;

  std::size_t handover_count() const { return handovers.size(); }
};

/// Runs the full closed loop for spec.duration_ms on one logical timeline:
/// the simulator advances one granularity period, then the xApp drains its
/// inbox, evaluates the policy and may issue one control, which the
/// simulator picks up at the start of the next slot.
RunArtifacts run_scenario(const ScenarioSpec& spec, bool record_slots = false);

nlohmann::ordered_json summary_json(const RunArtifacts& artifacts);

/// Writes du_metrics.csv, ue_metrics.csv, events.jsonl and summary.json
/// (plus slot_log.csv when include_slot_log is set) into out_dir.
void write_outputs(const RunArtifacts& artifacts, const std::filesystem::path& out_dir,
                   bool include_slot_log = false);

}  // namespace ranmlb::harness
