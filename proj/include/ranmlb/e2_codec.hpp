#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ranmlb/e2_messages.hpp"

namespace ranmlb::e2 {

struct EncodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DecodeError : std::runtime_error {
  enum class Kind {
    incomplete,   // frame shorter than its length field promises
    unsupported,  // unknown type byte, or control style/action other than 3/1
    malformed,    // length field inconsistent with the decoded body
  };

  DecodeError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind(kind) {}

  Kind kind;
};

// Wire format
// -----------
// frame   := u32 length of (type byte + body), then type byte, then body
// body    := message fields in declaration order
// ints    := big-endian, fixed width
// reals   := 8-byte IEEE-754, big-endian
// strings := u16 length + UTF-8 bytes
// lists   := u16 count + elements
//
// type bytes: 0x01 SubscriptionRequest, 0x02 SubscriptionResponse,
//             0x03 RicIndication, 0x04 RicControlRequest,
//             0x05 RicControlAck, 0x06 RicControlFailure
//
// Encoding is deterministic: equal messages produce identical frames.

/// Serializes one message into a frame. Throws EncodeError if the message
/// violates its type invariants.
std::vector<std::uint8_t> encode_message(const E2Message& msg);

/// Decodes exactly one frame (inverse of encode_message on valid input).
E2Message decode_message(std::span<const std::uint8_t> frame);

}  // namespace ranmlb::e2
