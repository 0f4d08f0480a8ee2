#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "ranmlb/domain.hpp"
#include "ranmlb/e2_transport.hpp"
#include "ranmlb/events.hpp"

namespace ranmlb::sim {

/// Piecewise-constant downlink offered load. Phase k applies from its start
/// time until the next phase begins.
struct TrafficPhase {
  std::uint64_t start_time_ms = 0;
  std::uint64_t cbr_bps = 0;
};

class TrafficProfile {
 public:
  TrafficProfile() = default;
  explicit TrafficProfile(std::vector<TrafficPhase> phases);

  /// Offered rate at a given instant. Requires a phase covering now_ms
  /// (guaranteed by the first-phase-at-zero invariant).
  std::uint64_t rate_at(std::uint64_t now_ms) const;

  const std::vector<TrafficPhase>& phases() const { return phases_; }

 private:
  std::vector<TrafficPhase> phases_;
};

enum class UeRole { mobile, stationary };

/// Scenario-facing UE description; the simulator builds its own runtime
/// context from this.
struct UeSetup {
  UeId ue_id = 0;
  UeRole role = UeRole::stationary;
  DuId initial_du = 0;
  double spectral_efficiency = 4.0;  // bits per symbol
  TrafficProfile traffic;
};

struct UeContext {
  UeId ue_id = 0;
  UeRole role = UeRole::stationary;
  DuId serving_du = 0;
  std::uint64_t buffer_bits = 0;
  double spectral_efficiency = 4.0;
  TrafficProfile traffic;
  std::uint64_t ho_blackout_until_us = 0;  // not schedulable before this time

  // Arrival remainder carry, in units of bit-microseconds: fractional bits
  // accumulate here so offered load converts to buffer bits without drift.
  std::uint64_t arrival_carry = 0;

  // Lifetime accounting for conservation checks.
  std::uint64_t total_arrived_bits = 0;
  std::uint64_t total_served_bits = 0;
  std::uint64_t total_dropped_bits = 0;  // nonzero only when HOs flush buffers
};

/// Per-granularity-period counters, reset when a KPM report is collected.
struct PeriodAccumulators {
  std::uint64_t used_prb_slots = 0;
  std::uint64_t served_bits = 0;
  std::uint64_t slot_count = 0;
  std::map<UeId, std::uint64_t> served_bits_per_ue;

  void reset() {
    used_prb_slots = 0;
    served_bits = 0;
    slot_count = 0;
    served_bits_per_ue.clear();
  }
};

struct DuState {
  DuId du_id = 0;
  CellConfig cell;
  std::set<UeId> attached_ues;
  PeriodAccumulators acc;
  std::uint64_t rr_cursor = 0;  // rotates service when backlogged UEs outnumber PRBs
};

struct SimConfig {
  std::uint32_t slot_duration_us = 500;  // 0.5 ms slots for 30 kHz SCS
  std::uint32_t granularity_ms = 1000;
  std::uint32_t ho_interruption_ms = 50;
  std::uint64_t seed = 0;
  bool flush_buffer_on_ho = false;  // default carries the DL buffer to the target DU

  void validate() const;  // throws std::invalid_argument
};

/// Link-capacity model: 12 subcarriers x 14 symbols per PRB per slot at a
/// fixed per-UE spectral efficiency, floored, clamped to at least 1 bit.
std::uint32_t bits_per_prb_per_slot(const CellConfig& cell, double spectral_efficiency);

/// Adds one slot's worth of CBR arrivals to the UE buffer. Fractional bits
/// accumulate exactly in ue.arrival_carry (denominator 1e6 bit-us), so a
/// second of slots adds exactly cbr_bps bits.
void enqueue_arrivals(UeContext& ue, std::uint64_t now_us, std::uint32_t slot_duration_us);

struct SlotShare {
  UeId ue_id = 0;
  std::uint32_t used_prbs = 0;
  std::uint64_t served_bits = 0;
};

struct SlotOutcome {
  std::uint32_t used_prbs = 0;
  std::uint64_t served_bits = 0;
  std::vector<SlotShare> per_ue;  // UEs that were served this slot, by ue_id
};

/// One slot of downlink scheduling: work-conserving round-robin over
/// backlogged UEs. PRBs are split into equal shares each round, remainder to
/// the lowest ue_ids; shares a UE cannot fill return to the pool for the next
/// round. When backlogged UEs outnumber the remaining PRBs, single PRBs are
/// handed out starting at du.rr_cursor so no UE starves.
/// Callers pass only UEs attached to this DU and not in handover blackout.
SlotOutcome step_slot(DuState& du, const std::vector<UeContext*>& ues, std::uint64_t now_us);

/// Builds the KPM payload for one granularity period from the DU
/// accumulators and resets them. Call exactly at period boundaries.
KpmReport collect_kpm_report(DuState& du, const std::vector<const UeContext*>& attached_ues,
                             std::uint64_t period_end_ms, std::uint32_t granularity_ms);

struct HandoverError : std::runtime_error {
  enum class Cause { stale_context, invalid_target };

  HandoverError(Cause cause, const std::string& what)
      : std::runtime_error(what), cause(cause) {}

  Cause cause;
};

struct HandoverResult {
  UeId ue_id = 0;
  DuId source_du = 0;
  DuId target_du = 0;
  std::uint64_t time_us = 0;
};

/// Per-slot scheduling record, kept when slot recording is enabled.
struct SlotRecord {
  std::uint64_t time_us = 0;
  DuId du_id = 0;
  std::uint32_t used_prbs = 0;
  std::uint64_t served_bits = 0;
  std::vector<SlotShare> per_ue;
};

/// Deterministic discrete-event model of the disaggregated RAN: per-slot PRB
/// scheduling at each DU, buffer dynamics driven by traffic profiles, and
/// CU-mediated inter-DU handovers commanded over the E2 endpoint.
///
/// Within a slot the order is fixed: E2 commands, then traffic arrivals, then
/// scheduling, then KPM reporting at granularity boundaries.
class RanSimulator {
 public:
  RanSimulator(const SimConfig& config, const std::vector<CellConfig>& cells,
               const std::vector<UeSetup>& ues, e2::Endpoint* endpoint,
               EventLog* events, bool record_slots = false);

  /// Advances the logical clock slot by slot until t_end_ms.
  void run_until_ms(std::uint64_t t_end_ms);

  /// Moves a UE between DUs, carrying (or flushing) its DL buffer and opening
  /// a scheduling blackout of ho_interruption_ms. Throws HandoverError with
  /// cause stale_context when the UE is not currently on source_du (including
  /// when it is already on the target) and invalid_target for an unknown DU.
  HandoverResult execute_handover(UeId ue_id, DuId source_du, DuId target_du);

  std::uint64_t now_us() const { return now_us_; }
  const SimConfig& config() const { return config_; }
  const std::map<DuId, DuState>& dus() const { return dus_; }
  const std::map<UeId, UeContext>& ues() const { return ues_; }
  const DuState& du(DuId id) const { return dus_.at(id); }
  const UeContext& ue(UeId id) const { return ues_.at(id); }
  const std::vector<SlotRecord>& slot_records() const { return slot_records_; }

 private:
  struct Subscription {
    std::uint32_t request_id = 0;
    DuId du_id = 0;
    std::uint32_t granularity_ms = 0;
    std::uint64_t next_report_ms = 0;
  };

  void process_e2(std::uint64_t now_us);
  void handle_subscription(const e2::SubscriptionRequest& req);
  void handle_control(const e2::RicControlRequest& req);
  void emit_reports(std::uint64_t slot_end_us);
  DuId du_of_cell(CellId cell_id) const;  // 0 when unknown

  SimConfig config_;
  std::uint64_t now_us_ = 0;
  std::map<DuId, DuState> dus_;
  std::map<UeId, UeContext> ues_;
  std::vector<Subscription> subscriptions_;
  e2::Endpoint* endpoint_;
  EventLog* events_;
  bool record_slots_;
  std::vector<SlotRecord> slot_records_;
};

}  // namespace ranmlb::sim
