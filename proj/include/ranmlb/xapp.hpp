#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "ranmlb/domain.hpp"
#include "ranmlb/e2_transport.hpp"
#include "ranmlb/events.hpp"

namespace ranmlb::xapp {

struct BusyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// MLB policy parameters. The high/low conditions combine DL PRB utilization
/// and DU-aggregate MAC DL buffer volume; by default both metrics must cross
/// their threshold (conjunction), with a disjunction toggle available.
/// ttt_ms plays two roles: how long a condition must be sustained before a
/// handover, and the minimum spacing between successive handovers of one UE.
struct XappConfig {
  double prb_high_percent = 90.0;
  double prb_low_percent = 50.0;
  std::uint64_t buf_high_bits = 5'000'000;
  std::uint64_t buf_low_bits = 1'000'000;
  std::uint32_t ttt_ms = 10'000;
  std::uint32_t window_ms = 10'000;
  std::uint32_t granularity_ms = 1'000;
  DuId home_du = 0;
  std::set<UeId> mobile_ues;
  std::map<DuId, CellId> cells;  // DU -> cell, from node configuration
  bool use_disjunction = false;

  void validate() const;  // throws std::invalid_argument
};

struct PendingControl {
  std::uint32_t control_id = 0;
  UeId ue_id = 0;
  std::optional<std::uint64_t> previous_ho_time_ms;  // restored if the control fails
};

struct PolicyState {
  std::map<DuId, RollingWindow> du_windows;
  std::map<UeId, DuId> ue_to_du;             // from the latest indications
  std::map<UeId, std::uint64_t> last_ho_time_ms;
  std::optional<PendingControl> pending;     // at most one control in flight
  std::uint32_t next_control_id = 1;
};

enum class HandoverReason { offload, return_home };

std::string_view to_string(HandoverReason reason);

struct HandoverDecision {
  UeId ue_id = 0;
  DuId source_du = 0;
  CellId target_cell_id = 0;
  HandoverReason reason = HandoverReason::offload;

  friend bool operator==(const HandoverDecision&, const HandoverDecision&) = default;
};

/// Empty windows for every configured DU, nothing else.
PolicyState make_initial_state(const XappConfig& config);

/// Folds one KPM indication into the state: pushes the DU-level sample into
/// that DU's rolling window and remaps every listed UE to the reporting DU.
/// Indications for unknown DUs are ignored with a logged warning.
void on_indication(PolicyState& state, const e2::RicIndication& indication);

/// Lowest-utilization candidate cell (tie-break: lowest cell_id). Pure argmin
/// over (cell_id, utilization) pairs; empty input yields nullopt.
std::optional<CellId> pick_least_loaded(
    const std::vector<std::pair<CellId, double>>& candidates);

/// Evaluates the dual-metric threshold policy. Pure function of its inputs.
///
/// Offload: every mobile UE plus at least one other UE sit on home_du and the
/// home window sustained the high condition for ttt; target = cell of the
/// least-utilized other DU whose own latest sample is not above the high
/// condition (no decision when every candidate DU is itself overloaded).
/// Return: the mobile UE sits elsewhere and the home window sustained the low
/// condition for ttt; target = home cell.
/// Guards: no decision while a control is pending, or within ttt of the UE's
/// previous handover.
std::optional<HandoverDecision> evaluate_policy(const PolicyState& state,
                                                const XappConfig& config,
                                                std::uint64_t now_ms);

/// Builds the RC handover control for a decision, stamps the UE's handover
/// time provisionally and marks the control pending. Throws BusyError when a
/// control is already outstanding.
e2::RicControlRequest make_control_request(PolicyState& state, const HandoverDecision& decision,
                                           std::uint64_t now_ms);

/// Clears the pending control on its ack or failure; a failure also rolls the
/// UE's handover timestamp back so the policy may retry. Throws ProtocolError
/// when the control_id does not match the pending control.
void record_control_outcome(PolicyState& state, const e2::RicControlAck& ack);
void record_control_outcome(PolicyState& state, const e2::RicControlFailure& failure);

/// Message-driven MLB xApp over an E2 endpoint: subscribes to every
/// configured DU, folds indications into the policy state and issues RC
/// handover controls when the policy fires.
class MlbXapp {
 public:
  using IndicationTap = std::function<void(const e2::RicIndication&)>;

  MlbXapp(XappConfig config, e2::Endpoint* endpoint, EventLog* events,
          IndicationTap indication_tap = nullptr);

  /// Sends one KPM subscription per configured DU.
  void start(std::uint64_t now_ms);

  /// Drains pending messages, then evaluates the policy once and issues at
  /// most one control.
  void tick(std::uint64_t now_ms);

  const PolicyState& state() const { return state_; }
  const XappConfig& config() const { return config_; }

 private:
  void handle(const e2::E2Message& msg, std::uint64_t now_ms);

  XappConfig config_;
  PolicyState state_;
  e2::Endpoint* endpoint_;
  EventLog* events_;
  IndicationTap indication_tap_;
  std::set<std::uint32_t> subscription_ids_;
};

}  // namespace ranmlb::xapp
