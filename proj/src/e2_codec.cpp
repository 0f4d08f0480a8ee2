#include "ranmlb/e2_codec.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <set>

namespace ranmlb::e2 {

namespace {

constexpr std::uint8_t kTypeSubscriptionRequest = 0x01;
constexpr std::uint8_t kTypeSubscriptionResponse = 0x02;
constexpr std::uint8_t kTypeRicIndication = 0x03;
constexpr std::uint8_t kTypeRicControlRequest = 0x04;
constexpr std::uint8_t kTypeRicControlAck = 0x05;
constexpr std::uint8_t kTypeRicControlFailure = 0x06;

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }

  void u16(std::uint16_t v) {
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
    buf_.push_back(static_cast<std::uint8_t>(v));
  }

  void u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) {
      buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
  }

  void u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) {
      buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
  }

  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void str(const std::string& s) {
    if (s.size() > 0xFFFF) {
      throw EncodeError("string too long for u16 length prefix");
    }
    u16(static_cast<std::uint16_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }

  void count(std::size_t n) {
    if (n > 0xFFFF) {
      throw EncodeError("list too long for u16 count prefix");
    }
    u16(static_cast<std::uint16_t>(n));
  }

  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() { return take(1)[0]; }

  std::uint16_t u16() {
    auto b = take(2);
    return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
  }

  std::uint32_t u32() {
    auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v = (v << 8) | b[i];
    }
    return v;
  }

  std::uint64_t u64() {
    auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v = (v << 8) | b[i];
    }
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::string str() {
    const std::uint16_t len = u16();
    auto b = take(len);
    return std::string(b.begin(), b.end());
  }

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::span<const std::uint8_t> take(std::size_t n) {
    if (remaining() < n) {
      throw DecodeError(DecodeError::Kind::malformed,
                        "frame body shorter than its fields require");
    }
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

void check_invariants(const SubscriptionRequest& m) {
  if (m.granularity_ms == 0) {
    throw EncodeError("SubscriptionRequest: granularity_ms must be > 0");
  }
  for (const auto& name : m.measurements) {
    if (!is_registered_measurement(name)) {
      throw EncodeError("SubscriptionRequest: unregistered measurement '" + name + "'");
    }
  }
}

void check_invariants(const RicIndication& m) {
  std::set<UeId> seen;
  for (const auto& ue : m.report.ue_metrics) {
    if (!seen.insert(ue.ue_id).second) {
      throw EncodeError("RicIndication: ue_metrics lists UE " +
                        std::to_string(ue.ue_id) + " more than once");
    }
  }
}

void check_invariants(const RicControlRequest& m) {
  if (m.style != 3 || m.action != 1) {
    throw EncodeError("RicControlRequest: only style 3 / action 1 is supported");
  }
}

void encode_body(ByteWriter& w, const SubscriptionRequest& m) {
  check_invariants(m);
  w.u32(m.request_id);
  w.u32(m.du_id);
  w.u32(m.granularity_ms);
  w.count(m.measurements.size());
  for (const auto& name : m.measurements) {
    w.str(name);
  }
}

void encode_body(ByteWriter& w, const SubscriptionResponse& m) {
  w.u32(m.request_id);
  w.u32(m.du_id);
}

void encode_body(ByteWriter& w, const RicIndication& m) {
  check_invariants(m);
  w.u32(m.request_id);
  w.u32(m.report.du_id);
  w.u64(m.report.timestamp_ms);
  w.f64(m.report.dl_prb_utilization_percent);
  w.u64(m.report.mac_dl_buffer_volume_bits);
  w.u64(m.report.dl_throughput_bps);
  w.count(m.report.ue_metrics.size());
  for (const auto& ue : m.report.ue_metrics) {
    w.u32(ue.ue_id);
    w.u64(ue.buffer_bits);
    w.u64(ue.throughput_bps);
  }
}

void encode_body(ByteWriter& w, const RicControlRequest& m) {
  check_invariants(m);
  w.u32(m.control_id);
  w.u8(m.style);
  w.u8(m.action);
  w.u32(m.ue_id);
  w.u32(m.target_cell_id);
}

void encode_body(ByteWriter& w, const RicControlAck& m) { w.u32(m.control_id); }

void encode_body(ByteWriter& w, const RicControlFailure& m) {
  w.u32(m.control_id);
  w.u8(static_cast<std::uint8_t>(m.cause));
}

std::uint8_t type_byte(const E2Message& msg) {
  switch (msg.index()) {
    case 0: return kTypeSubscriptionRequest;
    case 1: return kTypeSubscriptionResponse;
    case 2: return kTypeRicIndication;
    case 3: return kTypeRicControlRequest;
    case 4: return kTypeRicControlAck;
    default: return kTypeRicControlFailure;
  }
}

E2Message decode_body(std::uint8_t type, ByteReader& r) {
  switch (type) {
    case kTypeSubscriptionRequest: {
      SubscriptionRequest m;
      m.request_id = r.u32();
      m.du_id = r.u32();
      m.granularity_ms = r.u32();
      const std::uint16_t n = r.u16();
      m.measurements.reserve(n);
      for (std::uint16_t i = 0; i < n; ++i) {
        m.measurements.push_back(r.str());
      }
      return m;
    }
    case kTypeSubscriptionResponse: {
      SubscriptionResponse m;
      m.request_id = r.u32();
      m.du_id = r.u32();
      return m;
    }
    case kTypeRicIndication: {
      RicIndication m;
      m.request_id = r.u32();
      m.report.du_id = r.u32();
      m.report.timestamp_ms = r.u64();
      m.report.dl_prb_utilization_percent = r.f64();
      m.report.mac_dl_buffer_volume_bits = r.u64();
      m.report.dl_throughput_bps = r.u64();
      const std::uint16_t n = r.u16();
      m.report.ue_metrics.reserve(n);
      for (std::uint16_t i = 0; i < n; ++i) {
        UeMetric ue;
        ue.ue_id = r.u32();
        ue.buffer_bits = r.u64();
        ue.throughput_bps = r.u64();
        m.report.ue_metrics.push_back(ue);
      }
      return m;
    }
    case kTypeRicControlRequest: {
      RicControlRequest m;
      m.control_id = r.u32();
      m.style = r.u8();
      m.action = r.u8();
      if (m.style != 3 || m.action != 1) {
        throw DecodeError(DecodeError::Kind::unsupported,
                          "RicControlRequest: unsupported service style/action " +
                              std::to_string(m.style) + "/" + std::to_string(m.action));
      }
      m.ue_id = r.u32();
      m.target_cell_id = r.u32();
      return m;
    }
    case kTypeRicControlAck: {
      RicControlAck m;
      m.control_id = r.u32();
      return m;
    }
    case kTypeRicControlFailure: {
      RicControlFailure m;
      m.control_id = r.u32();
      m.cause = static_cast<ControlFailureCause>(r.u8());
      return m;
    }
    default:
      throw DecodeError(DecodeError::Kind::unsupported,
                        "unknown message type byte " + std::to_string(type));
  }
}

}  // namespace

bool is_registered_measurement(std::string_view name) {
  return std::find(kMeasurementNames.begin(), kMeasurementNames.end(), name) !=
         kMeasurementNames.end();
}

std::string_view to_string(ControlFailureCause cause) {
  switch (cause) {
    case ControlFailureCause::stale_context: return "stale_context";
    case ControlFailureCause::invalid_target: return "invalid_target";
    case ControlFailureCause::unsupported: return "unsupported";
  }
  return "unknown";
}

std::vector<std::uint8_t> encode_message(const E2Message& msg) {
  ByteWriter w;
  w.u32(0);  // length placeholder, patched below
  w.u8(type_byte(msg));
  std::visit([&w](const auto& m) { encode_body(w, m); }, msg);
  auto out = w.take();
  const auto length = static_cast<std::uint32_t>(out.size() - 4);
  for (int i = 0; i < 4; ++i) {
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(length >> (24 - 8 * i));
  }
  return out;
}

E2Message decode_message(std::span<const std::uint8_t> frame) {
  if (frame.size() < 4) {
    throw DecodeError(DecodeError::Kind::incomplete, "frame shorter than length field");
  }
  std::uint32_t declared = 0;
  for (int i = 0; i < 4; ++i) {
    declared = (declared << 8) | frame[static_cast<std::size_t>(i)];
  }
  if (declared == 0) {
    throw DecodeError(DecodeError::Kind::malformed, "frame length field is zero");
  }
  if (frame.size() < 4u + declared) {
    throw DecodeError(DecodeError::Kind::incomplete,
                      "frame truncated: length field promises " + std::to_string(declared) +
                          " bytes, got " + std::to_string(frame.size() - 4));
  }
  if (frame.size() > 4u + declared) {
    throw DecodeError(DecodeError::Kind::malformed, "trailing bytes after frame");
  }

  ByteReader r(frame.subspan(4, declared));
  const std::uint8_t type = r.u8();
  E2Message msg = decode_body(type, r);
  if (r.remaining() != 0) {
    throw DecodeError(DecodeError::Kind::malformed,
                      "frame length field larger than the decoded body");
  }
  return msg;
}

}  // namespace ranmlb::e2
