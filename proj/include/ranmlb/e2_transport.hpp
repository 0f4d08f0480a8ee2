#pragma once

#include <memory>
#include <optional>
#include <utility>

#include "ranmlb/e2_codec.hpp"

namespace ranmlb::e2 {

struct DisconnectedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One side of an in-process loopback link. Messages are encoded on send and
/// decoded on receive, so every exchange passes through the wire codec.
/// Delivery is reliable, loss-free and FIFO.
class Endpoint {
 public:
  Endpoint(Endpoint&&) noexcept = default;
  Endpoint& operator=(Endpoint&&) noexcept = default;
  Endpoint(const Endpoint&) = delete;
  Endpoint& operator=(const Endpoint&) = delete;
  ~Endpoint();

  /// Throws DisconnectedError if the peer has closed.
  void send(const E2Message& msg);

  /// Next pending message, or nullopt when the queue is empty. Throws
  /// DisconnectedError once the peer has closed and the queue is drained.
  std::optional<E2Message> poll();

  void close();
  bool closed() const;

 private:
  struct LinkState;
  friend std::pair<Endpoint, Endpoint> make_loopback();
  Endpoint(std::shared_ptr<LinkState> state, int side);

  std::shared_ptr<LinkState> state_;
  int side_ = 0;
};

/// Creates a connected endpoint pair.
std::pair<Endpoint, Endpoint> make_loopback();

}  // namespace ranmlb::e2
