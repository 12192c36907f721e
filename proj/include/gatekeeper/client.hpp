// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gatekeeper/bytes.hpp"
#include "gatekeeper/events.hpp"
#include "gatekeeper/policy.hpp"
#include "gatekeeper/service.hpp"
#include "gatekeeper/time.hpp"

namespace gatekeeper::client {

/// The server answered with a non-2xx status.
class ApiError : public std::runtime_error {
 public:
  ApiError(int status, std::string error_id, const std::string& message)
      : std::runtime_error(message), status_(status), error_id_(std::move(error_id)) {}

  int status() const { return status_; }
  const std::string& error_id() const { return error_id_; }

 private:
  int status_;
  std::string error_id_;
};

/// No HTTP response at all (connection refused, reset, timeout).
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PolicyRow {
  policy::User user;
  policy::AccessPolicy policy;
  std::string status;
};

struct EventsResult {
  std::vector<AccessEvent> events;
  std::size_t total = 0;
};

/// Blocking REST client for one server. Safe to share between threads; each
/// call opens its own connection.
class ApiClient {
 public:
  ApiClient(std::string host, int port, std::string admin_token = {});
  ~ApiClient();
  ApiClient(ApiClient&&) noexcept;
  ApiClient& operator=(ApiClient&&) noexcept;

  const std::string& host() const;
  int port() const;
  const std::string& admin_token() const;

  service::GateRegistration register_gate(const std::string& name, const std::string& location);
  std::vector<policy::Gate> list_gates();

  service::UserRegistration register_user(const std::string& first_name, const std::string& last_name,
                                          ByteView photo);
  policy::User update_user(const policy::UserId& user, std::optional<std::string> first_name,
                           std::optional<std::string> last_name, std::optional<Bytes> photo);
  std::vector<policy::User> list_users();

  /// `time_override` goes out as the virtual-time header.
  service::CheckinResult checkin(const service::CheckinRequest& request);

  /// `at` is the time used for the returned status (virtual time header).
  PolicyRow upsert_policy(const policy::UserId& user, policy::GateId gate, bool enabled,
                          std::optional<Timestamp> expires_at, std::optional<Timestamp> at = std::nullopt);
  std::vector<PolicyRow> list_policies(policy::GateId gate, std::optional<Timestamp> at = std::nullopt);

  EventsResult query_events(const EventFilter& filter, Page page = {});
  /// Every matching event across all pages, newest first.
  std::vector<AccessEvent> all_events(const EventFilter& filter = {});

  Bytes get_photo(const std::string& content_hash);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Background reader of GET /api/feed. Frames are kept in arrival order.
class FeedListener {
 public:
  FeedListener(std::string host, int port, std::string admin_token, EventFilter filter = {});
  ~FeedListener();

  FeedListener(const FeedListener&) = delete;
  FeedListener& operator=(const FeedListener&) = delete;

  /// Connects and waits for the first frame. Throws ApiError for a refused
  /// subscription and TransportError when nothing arrives in time.
  void start(std::chrono::milliseconds timeout = std::chrono::seconds(5));

  /// Waits until `pred(frames)` holds. Returns the final verdict.
  bool wait_until(const std::function<bool(const std::vector<nlohmann::json>&)>& pred,
                  std::chrono::milliseconds timeout);

  /// Waits for `count` event frames.
  bool wait_for_events(std::size_t count, std::chrono::milliseconds timeout);

  std::vector<nlohmann::json> frames() const;
  std::vector<AccessEvent> events() const;

  /// True once the server closed the stream.
  bool ended() const;

  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gatekeeper::client
