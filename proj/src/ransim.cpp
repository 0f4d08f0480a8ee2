#include "ranmlb/ransim.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>
#include <string>

namespace ranmlb::sim {

namespace {

// Denominator for the arrival remainder carry: bits-per-second times
// microseconds leaves a factor of 1e6 to divide out.
constexpr std::uint64_t kCarryDenominator = 1'000'000;

constexpr std::uint32_t kSubcarriersPerPrb = 12;
constexpr std::uint32_t kSymbolsPerSlot = 14;

void warn(const std::string& msg) { std::cerr << "[ransim] warning: " << msg << "\n"; }

}  // namespace

TrafficProfile::TrafficProfile(std::vector<TrafficPhase> phases) : phases_(std::move(phases)) {
  if (phases_.empty()) {
    throw std::invalid_argument("TrafficProfile: at least one phase required");
  }
  if (phases_.front().start_time_ms != 0) {
    throw std::invalid_argument("TrafficProfile: first phase must start at 0");
  }
  for (std::size_t i = 1; i < phases_.size(); ++i) {
    if (phases_[i].start_time_ms <= phases_[i - 1].start_time_ms) {
      throw std::invalid_argument("TrafficProfile: phase start times must be strictly increasing");
    }
  }
}

std::uint64_t TrafficProfile::rate_at(std::uint64_t now_ms) const {
  if (phases_.empty()) {
    throw std::logic_error("TrafficProfile: no phase covers the requested time");
  }
  auto it = std::upper_bound(phases_.begin(), phases_.end(), now_ms,
                             [](std::uint64_t t, const TrafficPhase& p) {
                               return t < p.start_time_ms;
                             });
  return std::prev(it)->cbr_bps;
}

void SimConfig::validate() const {
  if (slot_duration_us == 0) {
    throw std::invalid_argument("SimConfig: slot_duration_us must be > 0");
  }
  if (granularity_ms == 0 ||
      (static_cast<std::uint64_t>(granularity_ms) * 1000) % slot_duration_us != 0) {
    throw std::invalid_argument(
        "SimConfig: granularity_ms must be a positive multiple of the slot duration");
  }
}

std::uint32_t bits_per_prb_per_slot(const CellConfig& cell, double spectral_efficiency) {
  (void)cell;  // capacity per PRB-slot does not depend on numerology
  if (spectral_efficiency <= 0.0) {
    throw std::invalid_argument("bits_per_prb_per_slot: spectral efficiency must be > 0");
  }
  const double bits = kSubcarriersPerPrb * kSymbolsPerSlot * spectral_efficiency;
  const auto floored = static_cast<std::uint64_t>(bits);
  return static_cast<std::uint32_t>(std::max<std::uint64_t>(floored, 1));
}

void enqueue_arrivals(UeContext& ue, std::uint64_t now_us, std::uint32_t slot_duration_us) {
  const std::uint64_t rate_bps = ue.traffic.rate_at(now_us / 1000);
  ue.arrival_carry += rate_bps * slot_duration_us;
  const std::uint64_t whole_bits = ue.arrival_carry / kCarryDenominator;
  ue.arrival_carry %= kCarryDenominator;
  ue.buffer_bits += whole_bits;
  ue.total_arrived_bits += whole_bits;
}

SlotOutcome step_slot(DuState& du, const std::vector<UeContext*>& ues, std::uint64_t now_us) {
  (void)now_us;
  SlotOutcome out;
  std::map<UeId, SlotShare> shares;

  std::vector<UeContext*> sorted = ues;
  std::sort(sorted.begin(), sorted.end(),
            [](const UeContext* a, const UeContext* b) { return a->ue_id < b->ue_id; });

  const auto serve = [&](UeContext* ue, std::uint64_t grant_bits, std::uint32_t used_prbs) {
    ue->buffer_bits -= grant_bits;
    ue->total_served_bits += grant_bits;
    auto& share = shares[ue->ue_id];
    share.ue_id = ue->ue_id;
    share.served_bits += grant_bits;
    share.used_prbs += used_prbs;
    out.served_bits += grant_bits;
    out.used_prbs += used_prbs;
  };

  std::uint32_t remaining = du.cell.total_prbs;
  while (remaining > 0) {
    std::vector<UeContext*> backlogged;
    for (auto* ue : sorted) {
      if (ue->buffer_bits > 0) {
        backlogged.push_back(ue);
      }
    }
    if (backlogged.empty()) {
      break;
    }
    const std::size_t n = backlogged.size();

    if (n > remaining) {
      // More queues than PRBs: one PRB each, rotating with the cursor.
      const std::size_t start = static_cast<std::size_t>(du.rr_cursor % n);
      for (std::uint32_t i = 0; i < remaining; ++i) {
        UeContext* ue = backlogged[(start + i) % n];
        const std::uint32_t bpp = bits_per_prb_per_slot(du.cell, ue->spectral_efficiency);
        serve(ue, std::min<std::uint64_t>(ue->buffer_bits, bpp), 1);
      }
      du.rr_cursor += remaining;
      remaining = 0;
      break;
    }

    const std::uint32_t share = remaining / static_cast<std::uint32_t>(n);
    const std::uint32_t extra = remaining % static_cast<std::uint32_t>(n);
    std::uint32_t used_this_round = 0;
    for (std::size_t i = 0; i < n; ++i) {
      UeContext* ue = backlogged[i];
      const std::uint32_t alloc = share + (i < extra ? 1 : 0);
      const std::uint32_t bpp = bits_per_prb_per_slot(du.cell, ue->spectral_efficiency);
      const std::uint64_t grant =
          std::min<std::uint64_t>(ue->buffer_bits, static_cast<std::uint64_t>(alloc) * bpp);
      if (grant == 0) {
        continue;
      }
      const auto used = static_cast<std::uint32_t>((grant + bpp - 1) / bpp);
      serve(ue, grant, used);
      used_this_round += used;
    }
    if (used_this_round == 0) {
      break;
    }
    remaining -= used_this_round;
  }

  for (const auto& [ue_id, share] : shares) {
    out.per_ue.push_back(share);
    du.acc.served_bits_per_ue[ue_id] += share.served_bits;
  }
  du.acc.used_prb_slots += out.used_prbs;
  du.acc.served_bits += out.served_bits;
  du.acc.slot_count += 1;
  return out;
}

KpmReport collect_kpm_report(DuState& du, const std::vector<const UeContext*>& attached_ues,
                             std::uint64_t period_end_ms, std::uint32_t granularity_ms) {
  if (granularity_ms == 0) {
    throw std::invalid_argument("collect_kpm_report: granularity_ms must be > 0");
  }
  KpmReport report;
  report.du_id = du.du_id;
  report.timestamp_ms = period_end_ms;
  report.dl_prb_utilization_percent =
      prb_utilization(du.acc.used_prb_slots, du.cell.total_prbs, du.acc.slot_count);
  report.dl_throughput_bps = du.acc.served_bits * 1000 / granularity_ms;
  for (const auto* ue : attached_ues) {
    report.mac_dl_buffer_volume_bits += ue->buffer_bits;
    std::uint64_t served = 0;
    if (auto it = du.acc.served_bits_per_ue.find(ue->ue_id);
        it != du.acc.served_bits_per_ue.end()) {
      served = it->second;
    }
    report.ue_metrics.push_back(UeMetric{ue->ue_id, ue->buffer_bits, served * 1000 / granularity_ms});
  }
  du.acc.reset();
  return report;
}

RanSimulator::RanSimulator(const SimConfig& config, const std::vector<CellConfig>& cells,
                           const std::vector<UeSetup>& ues, e2::Endpoint* endpoint,
                           EventLog* events, bool record_slots)
    : config_(config), endpoint_(endpoint), events_(events), record_slots_(record_slots) {
  config_.validate();
  for (const auto& cell : cells) {
    cell.validate();
    for (const auto& [du_id, du] : dus_) {
      if (du.cell.cell_id == cell.cell_id) {
        throw std::invalid_argument("duplicate cell_id " + std::to_string(cell.cell_id));
      }
    }
    if (dus_.count(cell.du_id) != 0) {
      throw std::invalid_argument("DU " + std::to_string(cell.du_id) +
                                  " configured with more than one cell");
    }
    DuState du;
    du.du_id = cell.du_id;
    du.cell = cell;
    dus_.emplace(cell.du_id, std::move(du));
  }
  for (const auto& setup : ues) {
    if (ues_.count(setup.ue_id) != 0) {
      throw std::invalid_argument("duplicate ue_id " + std::to_string(setup.ue_id));
    }
    auto du_it = dus_.find(setup.initial_du);
    if (du_it == dus_.end()) {
      throw std::invalid_argument("UE " + std::to_string(setup.ue_id) +
                                  " assigned to unknown DU " + std::to_string(setup.initial_du));
    }
    if (setup.spectral_efficiency <= 0.0) {
      throw std::invalid_argument("UE " + std::to_string(setup.ue_id) +
                                  " spectral efficiency must be > 0");
    }
    if (setup.traffic.phases().empty()) {
      throw std::invalid_argument("UE " + std::to_string(setup.ue_id) + " has no traffic profile");
    }
    UeContext ue;
    ue.ue_id = setup.ue_id;
    ue.role = setup.role;
    ue.serving_du = setup.initial_du;
    ue.spectral_efficiency = setup.spectral_efficiency;
    ue.traffic = setup.traffic;
    du_it->second.attached_ues.insert(setup.ue_id);
    ues_.emplace(setup.ue_id, std::move(ue));
  }
}

void RanSimulator::run_until_ms(std::uint64_t t_end_ms) {
  const std::uint64_t t_end_us = t_end_ms * 1000;
  if (t_end_us < now_us_) {
    throw std::invalid_argument("run_until_ms: target time is in the past");
  }
  while (now_us_ < t_end_us) {
    process_e2(now_us_);
    for (auto& [ue_id, ue] : ues_) {
      enqueue_arrivals(ue, now_us_, config_.slot_duration_us);
    }
    for (auto& [du_id, du] : dus_) {
      std::vector<UeContext*> eligible;
      for (UeId attached : du.attached_ues) {
        UeContext& ue = ues_.at(attached);
        if (now_us_ >= ue.ho_blackout_until_us) {
          eligible.push_back(&ue);
        }
      }
      SlotOutcome outcome = step_slot(du, eligible, now_us_);
      if (record_slots_) {
        slot_records_.push_back(SlotRecord{now_us_, du_id, outcome.used_prbs,
                                           outcome.served_bits, std::move(outcome.per_ue)});
      }
    }
    const std::uint64_t slot_end_us = now_us_ + config_.slot_duration_us;
    emit_reports(slot_end_us);
    now_us_ = slot_end_us;
  }
}

void RanSimulator::process_e2(std::uint64_t now_us) {
  if (endpoint_ == nullptr) {
    return;
  }
  (void)now_us;
  while (true) {
    std::optional<e2::E2Message> msg;
    try {
      msg = endpoint_->poll();
    } catch (const e2::DecodeError& e) {
      warn(std::string("dropping undecodable frame: ") + e.what());
      continue;
    }
    if (!msg) {
      return;
    }
    if (const auto* sub = std::get_if<e2::SubscriptionRequest>(&*msg)) {
      handle_subscription(*sub);
    } else if (const auto* ctl = std::get_if<e2::RicControlRequest>(&*msg)) {
      handle_control(*ctl);
    } else {
      warn("ignoring unexpected message type from RIC side");
    }
  }
}

void RanSimulator::handle_subscription(const e2::SubscriptionRequest& req) {
  if (dus_.find(req.du_id) == dus_.end()) {
    warn("subscription for unknown DU " + std::to_string(req.du_id) + " ignored");
    return;
  }
  if (req.granularity_ms == 0 ||
      (static_cast<std::uint64_t>(req.granularity_ms) * 1000) % config_.slot_duration_us != 0) {
    warn("subscription " + std::to_string(req.request_id) +
         " has a granularity misaligned with the slot duration; ignored");
    return;
  }
  // One active subscription per DU; a new request replaces the old one.
  std::erase_if(subscriptions_, [&](const Subscription& s) { return s.du_id == req.du_id; });
  Subscription sub;
  sub.request_id = req.request_id;
  sub.du_id = req.du_id;
  sub.granularity_ms = req.granularity_ms;
  sub.next_report_ms = (now_us_ / 1000 / req.granularity_ms + 1) * req.granularity_ms;
  subscriptions_.push_back(sub);

  endpoint_->send(e2::SubscriptionResponse{req.request_id, req.du_id});
  if (events_ != nullptr) {
    events_->emit(now_us_, "SUBSCRIPTION_RESPONSE",
                  {{"request_id", req.request_id}, {"du_id", req.du_id}});
  }
}

void RanSimulator::handle_control(const e2::RicControlRequest& req) {
  try {
    auto ue_it = ues_.find(req.ue_id);
    if (ue_it == ues_.end()) {
      throw HandoverError(HandoverError::Cause::stale_context,
                          "unknown UE " + std::to_string(req.ue_id));
    }
    DuId target = 0;
    bool target_found = false;
    for (const auto& [du_id, du] : dus_) {
      if (du.cell.cell_id == req.target_cell_id) {
        target = du_id;
        target_found = true;
        break;
      }
    }
    if (!target_found) {
      throw HandoverError(HandoverError::Cause::invalid_target,
                          "unknown target cell " + std::to_string(req.target_cell_id));
    }
    const HandoverResult result =
        execute_handover(req.ue_id, ue_it->second.serving_du, target);
    if (events_ != nullptr) {
      events_->emit(now_us_, "HO_COMPLETED",
                    {{"control_id", req.control_id},
                     {"ue_id", result.ue_id},
                     {"source_du", result.source_du},
                     {"target_du", result.target_du}});
      events_->emit(now_us_, "CONTROL_ACK", {{"control_id", req.control_id}});
    }
    endpoint_->send(e2::RicControlAck{req.control_id});
  } catch (const HandoverError& e) {
    const auto cause = e.cause == HandoverError::Cause::stale_context
                           ? e2::ControlFailureCause::stale_context
                           : e2::ControlFailureCause::invalid_target;
    if (events_ != nullptr) {
      events_->emit(now_us_, "CONTROL_FAILURE",
                    {{"control_id", req.control_id},
                     {"cause", std::string(e2::to_string(cause))},
                     {"detail", e.what()}});
    }
    endpoint_->send(e2::RicControlFailure{req.control_id, cause});
  }
}

HandoverResult RanSimulator::execute_handover(UeId ue_id, DuId source_du, DuId target_du) {
  auto target_it = dus_.find(target_du);
  if (target_it == dus_.end()) {
    throw HandoverError(HandoverError::Cause::invalid_target,
                        "unknown target DU " + std::to_string(target_du));
  }
  auto ue_it = ues_.find(ue_id);
  if (ue_it == ues_.end()) {
    throw HandoverError(HandoverError::Cause::stale_context,
                        "unknown UE " + std::to_string(ue_id));
  }
  UeContext& ue = ue_it->second;
  auto source_it = dus_.find(source_du);
  if (source_it == dus_.end() || ue.serving_du != source_du ||
      source_it->second.attached_ues.count(ue_id) == 0) {
    throw HandoverError(HandoverError::Cause::stale_context,
                        "UE " + std::to_string(ue_id) + " is not attached to DU " +
                            std::to_string(source_du));
  }
  if (source_du == target_du) {
    throw HandoverError(HandoverError::Cause::stale_context,
                        "UE " + std::to_string(ue_id) + " is already attached to the target");
  }

  source_it->second.attached_ues.erase(ue_id);
  target_it->second.attached_ues.insert(ue_id);
  ue.serving_du = target_du;
  if (config_.flush_buffer_on_ho) {
    ue.total_dropped_bits += ue.buffer_bits;
    ue.buffer_bits = 0;
  }
  ue.ho_blackout_until_us =
      now_us_ + static_cast<std::uint64_t>(config_.ho_interruption_ms) * 1000;
  return HandoverResult{ue_id, source_du, target_du, now_us_};
}

void RanSimulator::emit_reports(std::uint64_t slot_end_us) {
  for (auto& sub : subscriptions_) {
    if (slot_end_us != sub.next_report_ms * 1000) {
      continue;
    }
    DuState& du = dus_.at(sub.du_id);
    std::vector<const UeContext*> attached;
    for (UeId ue_id : du.attached_ues) {
      attached.push_back(&ues_.at(ue_id));
    }
    e2::RicIndication indication;
    indication.request_id = sub.request_id;
    indication.report =
        collect_kpm_report(du, attached, sub.next_report_ms, sub.granularity_ms);
    if (events_ != nullptr) {
      events_->emit(slot_end_us, "INDICATION",
                    {{"request_id", sub.request_id},
                     {"du_id", sub.du_id},
                     {"prb_util_percent", indication.report.dl_prb_utilization_percent},
                     {"buffer_bits", indication.report.mac_dl_buffer_volume_bits},
                     {"throughput_bps", indication.report.dl_throughput_bps}});
    }
    if (endpoint_ != nullptr) {
      endpoint_->send(indication);
    }
    sub.next_report_ms += sub.granularity_ms;
  }
}

}  // namespace ranmlb::sim
