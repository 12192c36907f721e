// SPDX-License-Identifier: Apache-2.0
#include "gatekeeper/feed.hpp"

#include <vector>

namespace gatekeeper::feed {

Subscription::Subscription(std::uint64_t id, EventFilter filter, std::size_t capacity)
    : id_(id), filter_(std::move(filter)), capacity_(capacity == 0 ? 1 : capacity) {}

Subscription::Next Subscription::wait_next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  ready_.wait_for(lock, timeout, [&] { return !queue_.empty() || overflowed_ || closed_; });
  if (!queue_.empty()) {
    Next next{Status::event, std::move(queue_.front())};
    queue_.pop_front();
    return next;
  }
  if (overflowed_) return {Status::overflow, std::nullopt};
  if (closed_) return {Status::closed, std::nullopt};
  return {Status::timeout, std::nullopt};
}

bool Subscription::offer(const AccessEvent& event) {
  {
    std::lock_guard lock(mutex_);
    if (closed_ || overflowed_) return !overflowed_;
    if (queue_.size() >= capacity_) {
      overflowed_ = true;
    } else {
      queue_.push_back(event);
    }
  }
  ready_.notify_all();
  return !overflowed();
}

void Subscription::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  ready_.notify_all();
}

bool Subscription::overflowed() const {
  std::lock_guard lock(mutex_);
  return overflowed_;
}

EventFeed::~EventFeed() { shutdown(); }

std::shared_ptr<Subscription> EventFeed::subscribe(EventFilter filter, std::optional<std::size_t> buffer) {
  std::lock_guard lock(mutex_);
  auto sub = std::make_shared<Subscription>(next_id_++, std::move(filter), buffer.value_or(default_buffer_));
  if (shut_down_) {
    sub->close();
  } else {
    subscribers_.emplace(sub->id(), sub);
  }
  return sub;
}

void EventFeed::unsubscribe(std::uint64_t subscriber_id) {
  std::shared_ptr<Subscription> sub;
  {
    std::lock_guard lock(mutex_);
    auto it = subscribers_.find(subscriber_id);
    if (it == subscribers_.end()) return;
    sub = std::move(it->second);
    subscribers_.erase(it);
  }
  sub->close();
}

void EventFeed::publish(const AccessEvent& event) {
  std::lock_guard lock(mutex_);
  std::vector<std::uint64_t> dropped;
  for (const auto& [id, sub] : subscribers_) {
    if (!sub->filter().matches_ignoring_time(event)) continue;
    if (!sub->offer(event)) dropped.push_back(id);
  }
  for (auto id : dropped) subscribers_.erase(id);
}

void EventFeed::shutdown() {
  std::map<std::uint64_t, std::shared_ptr<Subscription>> subs;
  {
    std::lock_guard lock(mutex_);
    shut_down_ = true;
    subs.swap(subscribers_);
  }
  for (auto& [id, sub] : subs) sub->close();
}

std::size_t EventFeed::subscriber_count() const {
  std::lock_guard lock(mutex_);
  return subscribers_.size();
}

}  // namespace gatekeeper::feed
