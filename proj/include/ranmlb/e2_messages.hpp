#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ranmlb/domain.hpp"

namespace ranmlb::e2 {

/// KPM measurement names accepted in subscriptions.
inline constexpr std::array<std::string_view, 3> kMeasurementNames = {
    "DL_PRB_UTILIZATION", "MAC_DL_BUFFER_VOLUME", "DL_THROUGHPUT"};

bool is_registered_measurement(std::string_view name);

struct SubscriptionRequest {
  std::uint32_t request_id = 0;
  DuId du_id = 0;
  std::uint32_t granularity_ms = 0;
  std::vector<std::string> measurements;

  friend bool operator==(const SubscriptionRequest&, const SubscriptionRequest&) = default;
};

struct SubscriptionResponse {
  std::uint32_t request_id = 0;
  DuId du_id = 0;

  friend bool operator==(const SubscriptionResponse&, const SubscriptionResponse&) = default;
};

/// Periodic KPM report indication for one DU.
struct RicIndication {
  std::uint32_t request_id = 0;
  KpmReport report;

  friend bool operator==(const RicIndication&, const RicIndication&) = default;
};

/// Mobility control in connected mode is the only supported service:
/// style 3, action 1 (handover of one UE to a target cell).
struct RicControlRequest {
  std::uint32_t control_id = 0;
  std::uint8_t style = 3;
  std::uint8_t action = 1;
  UeId ue_id = 0;
  CellId target_cell_id = 0;

  friend bool operator==(const RicControlRequest&, const RicControlRequest&) = default;
};

struct RicControlAck {
  std::uint32_t control_id = 0;

  friend bool operator==(const RicControlAck&, const RicControlAck&) = default;
};

enum class ControlFailureCause : std::uint8_t {
  stale_context = 1,
  invalid_target = 2,
  unsupported = 3,
};

std::string_view to_string(ControlFailureCause cause);

struct RicControlFailure {
  std::uint32_t control_id = 0;
  ControlFailureCause cause = ControlFailureCause::unsupported;

  friend bool operator==(const RicControlFailure&, const RicControlFailure&) = default;
};

using E2Message = std::variant<SubscriptionRequest, SubscriptionResponse, RicIndication,
                               RicControlRequest, RicControlAck, RicControlFailure>;

}  // namespace ranmlb::e2
