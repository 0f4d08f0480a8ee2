#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ranmlb {

/// One closed-loop event on the logical timeline. `fields` is a flat
/// key/value payload; insertion order is preserved when serialized.
struct LoopEvent {
  std::uint64_t time_us = 0;
  std::string type;
  nlohmann::ordered_json fields;
};

class EventLog {
 public:
  void emit(std::uint64_t time_us, std::string type,
            nlohmann::ordered_json fields = nlohmann::ordered_json::object()) {
    events_.push_back(LoopEvent{time_us, std::move(type), std::move(fields)});
  }

  const std::vector<LoopEvent>& events() const { return events_; }

  std::vector<const LoopEvent*> of_type(std::string_view type) const {
    std::vector<const LoopEvent*> out;
    for (const auto& e : events_) {
      if (e.type == type) {
        out.push_back(&e);
      }
    }
    return out;
  }

 private:
  std::vector<LoopEvent> events_;
};

}  // namespace ranmlb
