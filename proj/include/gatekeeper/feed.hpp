// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include "gatekeeper/events.hpp"

namespace gatekeeper::feed {

inline constexpr std::size_t kDefaultBufferSize = 1024;

/// One live subscriber: a bounded queue filled by EventFeed::publish and
/// drained by the consumer. Time bounds in the filter are ignored.
class Subscription {
 public:
  enum class Status {
    event,     // `event` holds the next event
    timeout,   // nothing arrived within the wait
    overflow,  // buffer filled up; the subscription is terminated
    closed,    // unsubscribed or feed shut down
  };

  struct Next {
    Status status;
    std::optional<AccessEvent> event;
  };

  Subscription(std::uint64_t id, EventFilter filter, std::size_t capacity);

  std::uint64_t id() const { return id_; }
  const EventFilter& filter() const { return filter_; }
  std::size_t capacity() const { return capacity_; }

  /// Blocks for up to `timeout`. Buffered events are always handed out
  /// before an overflow or close status.
  Next wait_next(std::chrono::milliseconds timeout);

  /// Non-blocking: pushes unless full. Returns false on overflow.
  bool offer(const AccessEvent& event);
  void close();

  bool overflowed() const;

 private:
  const std::uint64_t id_;
  const EventFilter filter_;
  const std::size_t capacity_;

  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<AccessEvent> queue_;
  bool overflowed_ = false;
  bool closed_ = false;
};

/// Fan-out of committed events to live subscribers. publish() never blocks
/// on a consumer; a full subscriber is cut off instead.
class EventFeed {
 public:
  explicit EventFeed(std::size_t default_buffer = kDefaultBufferSize) : default_buffer_(default_buffer) {}
  ~EventFeed();

  std::shared_ptr<Subscription> subscribe(EventFilter filter, std::optional<std::size_t> buffer = std::nullopt);
  void unsubscribe(std::uint64_t subscriber_id);

  void publish(const AccessEvent& event);

  /// Closes every subscription; later subscribe() calls get closed ones.
  void shutdown();

  std::size_t subscriber_count() const;

 private:
  const std::size_t default_buffer_;
  mutable std::mutex mutex_;
  std::map<std::uint64_t, std::shared_ptr<Subscription>> subscribers_;
  std::uint64_t next_id_ = 1;
  bool shut_down_ = false;
};

}  // namespace gatekeeper::feed
