#include "ranmlb/e2_transport.hpp"

#include <deque>
#include <mutex>
#include <vector>

namespace ranmlb::e2 {

struct Endpoint::LinkState {
  std::mutex mutex;
  std::deque<std::vector<std::uint8_t>> queue[2];  // queue[i]: inbox of side i
  bool open[2] = {true, true};
};

Endpoint::Endpoint(std::shared_ptr<LinkState> state, int side)
    : state_(std::move(state)), side_(side) {}

Endpoint::~Endpoint() {
  if (state_) {
    close();
  }
}

void Endpoint::send(const E2Message& msg) {
  auto frame = encode_message(msg);
  std::lock_guard lock(state_->mutex);
  if (!state_->open[1 - side_]) {
    throw DisconnectedError("E2 endpoint: peer closed");
  }
  state_->queue[1 - side_].push_back(std::move(frame));
}

std::optional<E2Message> Endpoint::poll() {
  std::vector<std::uint8_t> frame;
  {
    std::lock_guard lock(state_->mutex);
    auto& inbox = state_->queue[side_];
    if (inbox.empty()) {
      if (!state_->open[1 - side_]) {
        throw DisconnectedError("E2 endpoint: peer closed and queue drained");
      }
      return std::nullopt;
    }
    frame = std::move(inbox.front());
    inbox.pop_front();
  }
  return decode_message(frame);
}

void Endpoint::close() {
  std::lock_guard lock(state_->mutex);
  state_->open[side_] = false;
}

bool Endpoint::closed() const {
  std::lock_guard lock(state_->mutex);
  return !state_->open[side_];
}

std::pair<Endpoint, Endpoint> make_loopback() {
  auto state = std::make_shared<Endpoint::LinkState>();
  return {Endpoint(state, 0), Endpoint(state, 1)};
}

}  // namespace ranmlb::e2
