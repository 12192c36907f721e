// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gatekeeper/bytes.hpp"
#include "gatekeeper/error.hpp"
#include "gatekeeper/events.hpp"
#include "gatekeeper/feed.hpp"
#include "gatekeeper/ndef.hpp"
#include "gatekeeper/policy.hpp"
#include "gatekeeper/storage.hpp"
#include "gatekeeper/tag.hpp"
#include "gatekeeper/time.hpp"

namespace gatekeeper::service {

enum class Errc {
  unauthorized,
  duplicate_name,
  missing_name,
  invalid_photo,
  too_large,
  bad_time_range,
  unknown_user,
  unknown_gate,
  missing_expiration,
  not_found,
  bad_request,
  time_override_refused,
};

std::string_view to_string(Errc code);

/// Stable snake_case identifier used in JSON error bodies.
std::string_view error_id(Errc code);

using Error = BasicError<Errc>;

inline constexpr std::string_view kDefaultAndroidAppId = "com.gatekeeper.accessctl";
inline constexpr std::string_view kDefaultUniversalLink =
    "https://access.gatekeeper.example.com/mobile/check-in?src=nfc";

struct Config {
  std::string android_app_id{kDefaultAndroidAppId};
  std::string universal_link{kDefaultUniversalLink};
  /// Replaces the admin token persisted in the data directory.
  std::optional<std::string> admin_token;
  /// Allows callers to override the decision clock (virtual time).
  bool test_mode = false;
};

struct GateRegistration {
  policy::Gate gate;
  ndef::GateTagPayload tag;
  tag::Password tag_password{};
};

struct UserRegistration {
  policy::User user;
  /// Shown once; only its hash is stored.
  std::string device_token;
};

struct CheckinRequest {
  std::string device_token;
  ndef::Guid server_guid{};
  std::uint32_t gate_id = 0;
  Bytes photo;
  std::optional<Timestamp> client_time;
  /// Virtual decision time; refused unless the service runs in test mode.
  std::optional<Timestamp> time_override;
};

struct CheckinResult {
  policy::AccessDecision decision = policy::AccessDecision::grant();
  std::uint64_t event_seq = 0;
};

struct EventPage {
  /// Newest first.
  std::vector<AccessEvent> events;
  std::size_t total = 0;
  Page page;
};

/// The organization server, transport-independent. The HTTP layer maps
/// requests onto these calls one-to-one.
class AccessService {
 public:
  using Clock = std::function<Timestamp()>;

  AccessService(storage::Store& store, feed::EventFeed& feed, Config config, Clock clock = now_utc);

  const Config& config() const { return config_; }
  const ndef::Guid& server_guid() const;

  bool is_admin(std::string_view token) const;

  GateRegistration register_gate(std::string_view admin_token, std::string name, std::string location);
  std::vector<policy::Gate> list_gates(std::string_view admin_token) const;

  UserRegistration register_user(std::string_view admin_token, std::string first_name, std::string last_name,
                                 ByteView photo);
  /// Replaces names and/or the registration photo; past events keep their
  /// snapshot of the old photo.
  policy::User update_user(std::string_view admin_token, const policy::UserId& user,
                           std::optional<std::string> first_name, std::optional<std::string> last_name,
                           std::optional<Bytes> photo);
  std::vector<policy::User> list_users(std::string_view admin_token) const;

  policy::AccessPolicy upsert_policy(std::string_view admin_token, const policy::UserId& user, policy::GateId gate,
                                     bool enabled, std::optional<Timestamp> expires_at);
  std::vector<policy::PolicyListing> list_policies(std::string_view admin_token, policy::GateId gate) const;

  /// Throws Unauthorized only for an unknown device token; every other
  /// failure is a logged denial.
  CheckinResult check_in(const CheckinRequest& request);

  EventPage query_events(std::string_view admin_token, const EventFilter& filter, Page page) const;

  storage::PhotoBlob get_photo(std::string_view admin_token, std::string_view content_hash) const;

  std::shared_ptr<feed::Subscription> subscribe(std::string_view admin_token, EventFilter filter,
                                                std::optional<std::size_t> buffer = std::nullopt);
  void unsubscribe(std::uint64_t subscriber_id);

 private:
  void require_admin(std::string_view token) const;
  std::string store_photo(ByteView photo);

  storage::Store& store_;
  feed::EventFeed& feed_;
  Config config_;
  Clock clock_;
};

}  // namespace gatekeeper::service
