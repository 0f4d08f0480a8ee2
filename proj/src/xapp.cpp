#include "ranmlb/xapp.hpp"

#include <algorithm>
#include <iostream>
#include <string>

namespace ranmlb::xapp {

namespace {

void warn(const std::string& msg) { std::cerr << "[xapp] warning: " << msg << "\n"; }

bool high_condition(const LoadSample& s, const XappConfig& cfg) {
  const bool util = s.dl_prb_utilization_percent >= cfg.prb_high_percent;
  const bool buf = s.mac_dl_buffer_volume_bits >= cfg.buf_high_bits;
  return cfg.use_disjunction ? (util || buf) : (util && buf);
}

bool low_condition(const LoadSample& s, const XappConfig& cfg) {
  const bool util = s.dl_prb_utilization_percent <= cfg.prb_low_percent;
  const bool buf = s.mac_dl_buffer_volume_bits <= cfg.buf_low_bits;
  return cfg.use_disjunction ? (util || buf) : (util && buf);
}

bool ho_spacing_ok(const PolicyState& state, UeId ue, std::uint64_t now_ms,
                   std::uint32_t ttt_ms) {
  auto it = state.last_ho_time_ms.find(ue);
  if (it == state.last_ho_time_ms.end()) {
    return true;
  }
  return now_ms >= it->second && now_ms - it->second >= ttt_ms;
}

}  // namespace

std::string_view to_string(HandoverReason reason) {
  return reason == HandoverReason::offload ? "offload" : "return";
}

void XappConfig::validate() const {
  if (!(prb_low_percent < prb_high_percent)) {
    throw std::invalid_argument("xapp: prb_low_percent must be below prb_high_percent");
  }
  if (!(buf_low_bits < buf_high_bits)) {
    throw std::invalid_argument("xapp: buf_low_bits must be below buf_high_bits");
  }
  if (ttt_ms == 0 || granularity_ms == 0) {
    throw std::invalid_argument("xapp: ttt_ms and granularity_ms must be > 0");
  }
  if (ttt_ms > window_ms) {
    throw std::invalid_argument("xapp: ttt_ms must not exceed window_ms");
  }
  if (ttt_ms % granularity_ms != 0) {
    throw std::invalid_argument("xapp: ttt_ms must be a multiple of granularity_ms");
  }
  if (cells.find(home_du) == cells.end()) {
    throw std::invalid_argument("xapp: home_du is not a configured DU");
  }
}

PolicyState make_initial_state(const XappConfig& config) {
  PolicyState state;
  for (const auto& [du_id, cell_id] : config.cells) {
    state.du_windows.emplace(du_id, RollingWindow(config.window_ms));
  }
  return state;
}

void on_indication(PolicyState& state, const e2::RicIndication& indication) {
  auto window_it = state.du_windows.find(indication.report.du_id);
  if (window_it == state.du_windows.end()) {
    warn("indication for unknown DU " + std::to_string(indication.report.du_id) + " ignored");
    return;
  }
  try {
    window_it->second.push(indication.report.du_sample());
  } catch (const OrderingError& e) {
    warn(std::string("stale indication ignored: ") + e.what());
    return;
  }
  for (const auto& ue : indication.report.ue_metrics) {
    state.ue_to_du[ue.ue_id] = indication.report.du_id;
  }
}

std::optional<CellId> pick_least_loaded(
    const std::vector<std::pair<CellId, double>>& candidates) {
  if (candidates.empty()) {
    return std::nullopt;
  }
  auto best = candidates.front();
  for (const auto& c : candidates) {
    if (c.second < best.second || (c.second == best.second && c.first < best.first)) {
      best = c;
    }
  }
  return best.first;
}

std::optional<HandoverDecision> evaluate_policy(const PolicyState& state,
                                                const XappConfig& config,
                                                std::uint64_t now_ms) {
  if (state.pending.has_value()) {
    return std::nullopt;
  }
  auto home_it = state.du_windows.find(config.home_du);
  if (home_it == state.du_windows.end() || config.mobile_ues.empty()) {
    return std::nullopt;
  }
  const RollingWindow& home_window = home_it->second;

  const auto on_du = [&state](UeId ue, DuId du) {
    auto it = state.ue_to_du.find(ue);
    return it != state.ue_to_du.end() && it->second == du;
  };

  // Offload: everything the policy may move is on the home DU, together with
  // at least one UE it will not move, and the home DU sustained overload.
  bool all_mobile_home = true;
  for (UeId ue : config.mobile_ues) {
    if (!on_du(ue, config.home_du)) {
      all_mobile_home = false;
      break;
    }
  }
  if (all_mobile_home) {
    bool other_on_home = false;
    for (const auto& [ue, du] : state.ue_to_du) {
      if (du == config.home_du && config.mobile_ues.count(ue) == 0) {
        other_on_home = true;
        break;
      }
    }
    const bool sustained = window_sustained(
        home_window, [&](const LoadSample& s) { return high_condition(s, config); },
        config.ttt_ms, config.granularity_ms);
    if (other_on_home && sustained) {
      for (UeId ue : config.mobile_ues) {
        if (!ho_spacing_ok(state, ue, now_ms, config.ttt_ms)) {
          continue;
        }
        // Candidate targets: every other DU not itself showing the high
        // condition in its latest sample. Nowhere to offload -> no decision.
        std::vector<std::pair<CellId, double>> candidates;
        for (const auto& [du_id, cell_id] : config.cells) {
          if (du_id == config.home_du) {
            continue;
          }
          auto w = state.du_windows.find(du_id);
          const bool has_sample = w != state.du_windows.end() && !w->second.empty();
          if (has_sample && high_condition(w->second.newest(), config)) {
            continue;
          }
          candidates.emplace_back(cell_id, has_sample
                                               ? w->second.newest().dl_prb_utilization_percent
                                               : 0.0);
        }
        if (auto target = pick_least_loaded(candidates)) {
          return HandoverDecision{ue, config.home_du, *target, HandoverReason::offload};
        }
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  // Return: a mobile UE sits elsewhere and the home DU sustained underload.
  const bool sustained_low = window_sustained(
      home_window, [&](const LoadSample& s) { return low_condition(s, config); },
      config.ttt_ms, config.granularity_ms);
  if (!sustained_low) {
    return std::nullopt;
  }
  for (UeId ue : config.mobile_ues) {
    auto it = state.ue_to_du.find(ue);
    if (it == state.ue_to_du.end() || it->second == config.home_du) {
      continue;
    }
    if (!ho_spacing_ok(state, ue, now_ms, config.ttt_ms)) {
      continue;
    }
    return HandoverDecision{ue, it->second, config.cells.at(config.home_du),
                            HandoverReason::return_home};
  }
  return std::nullopt;
}

e2::RicControlRequest make_control_request(PolicyState& state, const HandoverDecision& decision,
                                           std::uint64_t now_ms) {
  if (state.pending.has_value()) {
    throw BusyError("a control request is already outstanding");
  }
  e2::RicControlRequest request;
  request.control_id = state.next_control_id++;
  request.style = 3;
  request.action = 1;
  request.ue_id = decision.ue_id;
  request.target_cell_id = decision.target_cell_id;

  PendingControl pending;
  pending.control_id = request.control_id;
  pending.ue_id = decision.ue_id;
  if (auto it = state.last_ho_time_ms.find(decision.ue_id); it != state.last_ho_time_ms.end()) {
    pending.previous_ho_time_ms = it->second;
  }
  state.pending = pending;
  state.last_ho_time_ms[decision.ue_id] = now_ms;
  return request;
}

namespace {

PendingControl take_pending(PolicyState& state, std::uint32_t control_id) {
  if (!state.pending.has_value() || state.pending->control_id != control_id) {
    throw ProtocolError("control outcome " + std::to_string(control_id) +
                        " does not match the pending control");
  }
  PendingControl pending = *state.pending;
  state.pending.reset();
  return pending;
}

}  // namespace

void record_control_outcome(PolicyState& state, const e2::RicControlAck& ack) {
  take_pending(state, ack.control_id);
}

void record_control_outcome(PolicyState& state, const e2::RicControlFailure& failure) {
  const PendingControl pending = take_pending(state, failure.control_id);
  if (pending.previous_ho_time_ms.has_value()) {
    state.last_ho_time_ms[pending.ue_id] = *pending.previous_ho_time_ms;
  } else {
    state.last_ho_time_ms.erase(pending.ue_id);
  }
}

MlbXapp::MlbXapp(XappConfig config, e2::Endpoint* endpoint, EventLog* events,
                 IndicationTap indication_tap)
    : config_(std::move(config)),
      state_(make_initial_state(config_)),
      endpoint_(endpoint),
      events_(events),
      indication_tap_(std::move(indication_tap)) {
  config_.validate();
}

void MlbXapp::start(std::uint64_t now_ms) {
  std::uint32_t request_id = 1;
  for (const auto& [du_id, cell_id] : config_.cells) {
    e2::SubscriptionRequest request;
    request.request_id = request_id++;
    request.du_id = du_id;
    request.granularity_ms = config_.granularity_ms;
    for (auto name : e2::kMeasurementNames) {
      request.measurements.emplace_back(name);
    }
    subscription_ids_.insert(request.request_id);
    endpoint_->send(request);
    if (events_ != nullptr) {
      events_->emit(now_ms * 1000, "SUBSCRIPTION",
                    {{"request_id", request.request_id},
                     {"du_id", du_id},
                     {"granularity_ms", config_.granularity_ms}});
    }
  }
}

void MlbXapp::tick(std::uint64_t now_ms) {
  while (true) {
    auto msg = endpoint_->poll();
    if (!msg) {
      break;
    }
    handle(*msg, now_ms);
  }
  if (auto decision = evaluate_policy(state_, config_, now_ms)) {
    const auto request = make_control_request(state_, *decision, now_ms);
    if (events_ != nullptr) {
      events_->emit(now_ms * 1000, "HO_ISSUED",
                    {{"control_id", request.control_id},
                     {"ue_id", decision->ue_id},
                     {"source_du", decision->source_du},
                     {"target_cell_id", decision->target_cell_id},
                     {"reason", std::string(to_string(decision->reason))}});
    }
    endpoint_->send(request);
  }
}

void MlbXapp::handle(const e2::E2Message& msg, std::uint64_t now_ms) {
  (void)now_ms;
  if (const auto* indication = std::get_if<e2::RicIndication>(&msg)) {
    if (subscription_ids_.count(indication->request_id) == 0) {
      warn("indication for unknown subscription " + std::to_string(indication->request_id) +
           " ignored");
      return;
    }
    if (indication_tap_) {
      indication_tap_(*indication);
    }
    on_indication(state_, *indication);
  } else if (const auto* ack = std::get_if<e2::RicControlAck>(&msg)) {
    record_control_outcome(state_, *ack);
  } else if (const auto* failure = std::get_if<e2::RicControlFailure>(&msg)) {
    record_control_outcome(state_, *failure);
  } else if (std::get_if<e2::SubscriptionResponse>(&msg) != nullptr) {
    // Subscription acknowledged; nothing to track beyond the request ids.
  } else {
    warn("ignoring unexpected message type from RAN side");
  }
}

}  // namespace ranmlb::xapp
