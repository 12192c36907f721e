// SPDX-License-Identifier: Apache-2.0
#include "gatekeeper/service.hpp"

#include <algorithm>
#include <cctype>

#include "gatekeeper/crypto.hpp"
#include "gatekeeper/photo.hpp"

namespace gatekeeper::service {

using policy::AccessDecision;
using policy::DenyReason;

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::unauthorized: return "Unauthorized";
    case Errc::duplicate_name: return "DuplicateName";
    case Errc::missing_name: return "MissingName";
    case Errc::invalid_photo: return "InvalidPhoto";
    case Errc::too_large: return "TooLarge";
    case Errc::bad_time_range: return "BadTimeRange";
    case Errc::unknown_user: return "UnknownUser";
    case Errc::unknown_gate: return "UnknownGate";
    case Errc::missing_expiration: return "MissingExpiration";
    case Errc::not_found: return "NotFound";
    case Errc::bad_request: return "BadRequest";
    case Errc::time_override_refused: return "TimeOverrideRefused";
  }
  return "Unknown";
}

std::string_view error_id(Errc code) {
  switch (code) {
    case Errc::unauthorized: return "unauthorized";
    case Errc::duplicate_name: return "duplicate_name";
    case Errc::missing_name: return "missing_name";
    case Errc::invalid_photo: return "invalid_photo";
    case Errc::too_large: return "too_large";
    case Errc::bad_time_range: return "bad_time_range";
    case Errc::unknown_user: return "unknown_user";
    case Errc::unknown_gate: return "unknown_gate";
    case Errc::missing_expiration: return "missing_expiration";
    case Errc::not_found: return "not_found";
    case Errc::bad_request: return "bad_request";
    case Errc::time_override_refused: return "time_override_refused";
  }
  return "unknown";
}

namespace {

[[noreturn]] void rethrow_policy(const policy::Error& e) {
  switch (e.code()) {
    case policy::Errc::unknown_user: throw Error(Errc::unknown_user, e.detail());
    case policy::Errc::unknown_gate: throw Error(Errc::unknown_gate, e.detail());
    case policy::Errc::missing_expiration: throw Error(Errc::missing_expiration, e.detail());
    case policy::Errc::duplicate_name: throw Error(Errc::duplicate_name, e.detail());
    case policy::Errc::missing_name: throw Error(Errc::missing_name, e.detail());
    case policy::Errc::missing_photo: throw Error(Errc::invalid_photo, e.detail());
  }
  throw Error(Errc::bad_request, e.detail());
}

}  // namespace

AccessService::AccessService(storage::Store& store, feed::EventFeed& feed, Config config, Clock clock)
    : store_(store), feed_(feed), config_(std::move(config)), clock_(std::move(clock)) {
  ndef::GateTagPayload probe;
  probe.android_app_id = config_.android_app_id;
  probe.universal_link = config_.universal_link;
  ndef::validate(probe);
}

const ndef::Guid& AccessService::server_guid() const { return store_.credentials().server_guid; }

bool AccessService::is_admin(std::string_view token) const {
  const std::string& expected = config_.admin_token ? *config_.admin_token : store_.credentials().admin_token;
  return !token.empty() && crypto::constant_time_equal(token, expected);
}

void AccessService::require_admin(std::string_view token) const {
  if (!is_admin(token)) throw Error(Errc::unauthorized, "admin token required");
}

std::string AccessService::store_photo(ByteView photo) {
  if (photo.empty()) throw Error(Errc::invalid_photo, "empty photo");
  if (photo.size() > photo::kMaxPhotoBytes) throw Error(Errc::too_large, "photo exceeds 5 MB");
  auto type = photo::sniff(photo);
  if (!type) throw Error(Errc::invalid_photo, "photo is neither PNG nor JPEG");
  try {
    return store_.put_photo(photo, *type);
  } catch (const storage::Error& e) {
    if (e.code() == storage::Errc::too_large) throw Error(Errc::too_large, e.detail());
    if (e.code() == storage::Errc::undecodable_image) throw Error(Errc::invalid_photo, e.detail());
    throw;
  }
}

GateRegistration AccessService::register_gate(std::string_view admin_token, std::string name, std::string location) {
  require_admin(admin_token);
  policy::Gate gate;
  try {
    gate = store_.update([&](storage::Entities& e) { return e.registry.add_gate(std::move(name), std::move(location)); });
  } catch (const policy::Error& e) {
    rethrow_policy(e);
  }
  GateRegistration out;
  out.gate = gate;
  out.tag.server_guid = server_guid();
  out.tag.gate_id = gate.id;
  out.tag.android_app_id = config_.android_app_id;
  out.tag.universal_link = config_.universal_link;
  out.tag_password = store_.credentials().tag_password;
  return out;
}

std::vector<policy::Gate> AccessService::list_gates(std::string_view admin_token) const {
  require_admin(admin_token);
  return store_.read([](const storage::Entities& e) {
    std::vector<policy::Gate> gates;
    for (const auto& [id, g] : e.registry.gates()) gates.push_back(g);
    return gates;
  });
}

UserRegistration AccessService::register_user(std::string_view admin_token, std::string first_name,
                                              std::string last_name, ByteView photo) {
  require_admin(admin_token);
  auto blank = [](const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
  };
  if (blank(first_name)) throw Error(Errc::missing_name, "first name is required");
  if (blank(last_name)) throw Error(Errc::missing_name, "last name is required");
  const std::string photo_hash = store_photo(photo);

  UserRegistration out;
  out.device_token = crypto::random_token(32);
  try {
    out.user = store_.update([&](storage::Entities& e) {
      auto user = e.registry.add_user(std::move(first_name), std::move(last_name), photo_hash);
      e.devices.emplace(storage::device_token_key(out.device_token), user.id);
      return user;
    });
  } catch (const policy::Error& e) {
    rethrow_policy(e);
  }
  return out;
}

policy::User AccessService::update_user(std::string_view admin_token, const policy::UserId& user_id,
                                        std::optional<std::string> first_name, std::optional<std::string> last_name,
                                        std::optional<Bytes> photo) {
  require_admin(admin_token);
  std::optional<std::string> photo_hash;
  if (photo) photo_hash = store_photo(*photo);
  try {
    return store_.update([&](storage::Entities& e) {
      const policy::User* current = e.registry.find_user(user_id);
      if (!current) throw Error(Errc::unknown_user, user_id.value);
      policy::User next = *current;
      if (first_name) next.first_name = *first_name;
      if (last_name) next.last_name = *last_name;
      if (photo_hash) next.registration_photo = *photo_hash;
      e.registry.update_user(next);
      return next;
    });
  } catch (const policy::Error& e) {
    rethrow_policy(e);
  }
}

std::vector<policy::User> AccessService::list_users(std::string_view admin_token) const {
  require_admin(admin_token);
  return store_.read([](const storage::Entities& e) {
    std::vector<policy::User> users;
    for (const auto& [id, u] : e.registry.users()) users.push_back(u);
    return users;
  });
}

policy::AccessPolicy AccessService::upsert_policy(std::string_view admin_token, const policy::UserId& user,
                                                  policy::GateId gate, bool enabled,
                                                  std::optional<Timestamp> expires_at) {
  require_admin(admin_token);
  try {
    return store_.update(
        [&](storage::Entities& e) { return e.registry.upsert_policy(user, gate, enabled, expires_at); });
  } catch (const policy::Error& e) {
    rethrow_policy(e);
  }
}

std::vector<policy::PolicyListing> AccessService::list_policies(std::string_view admin_token,
                                                                 policy::GateId gate) const {
  require_admin(admin_token);
  try {
    return store_.read([&](const storage::Entities& e) { return e.registry.list_policies_for_gate(gate); });
  } catch (const policy::Error& e) {
    rethrow_policy(e);
  }
}

CheckinResult AccessService::check_in(const CheckinRequest& request) {
  if (request.time_override && !config_.test_mode)
    throw Error(Errc::time_override_refused, "virtual time requires test mode");
  auto user_id = store_.user_for_device(request.device_token);
  if (!user_id) throw Error(Errc::unauthorized, "unknown device token");

  const Timestamp now = request.time_override ? *request.time_override : clock_();

  // The gate photo is kept whenever it is a valid image, whatever the outcome.
  std::optional<std::string> gate_photo;
  if (!request.photo.empty() && request.photo.size() <= photo::kMaxPhotoBytes) {
    if (auto type = photo::sniff(request.photo)) {
      try {
        gate_photo = store_.put_photo(request.photo, *type);
      } catch (const storage::Error& e) {
        if (e.code() != storage::Errc::undecodable_image) throw;
      }
    }
  }

  AccessEvent event;
  event.user_id = *user_id;
  event.claimed_gate_id = request.gate_id;
  event.timestamp = now;
  event.client_time = request.client_time;
  event.gate_photo = gate_photo;

  event.decision = store_.read([&](const storage::Entities& e) {
    const policy::User* user = e.registry.find_user(*user_id);
    event.registration_photo = user->registration_photo;
    if (request.server_guid != server_guid()) return AccessDecision::deny(DenyReason::unknown_org);
    if (!e.registry.find_gate(request.gate_id)) return AccessDecision::deny(DenyReason::unknown_gate);
    event.gate_id = request.gate_id;
    if (!gate_photo) return AccessDecision::deny(DenyReason::missing_photo);
    return policy::decide_access(e.registry.policies(), *user_id, request.gate_id, now);
  });

  CheckinResult result;
  result.decision = event.decision;
  result.event_seq = store_.append_event(std::move(event), [this](const AccessEvent& committed) {
    feed_.publish(committed);
  });
  return result;
}

EventPage AccessService::query_events(std::string_view admin_token, const EventFilter& filter, Page page) const {
  require_admin(admin_token);
  if (!filter.valid_range()) throw Error(Errc::bad_time_range, "time_from is after time_to");
  if (page.number == 0 || page.size == 0 || page.size > kMaxPageSize)
    throw Error(Errc::bad_request, "page must be >= 1 and page_size in [1, " + std::to_string(kMaxPageSize) + "]");

  auto matching = store_.scan_events(filter);
  EventPage out;
  out.total = matching.size();
  out.page = page;
  const std::size_t skip = (page.number - 1) * page.size;
  for (std::size_t i = skip; i < matching.size() && out.events.size() < page.size; ++i)
    out.events.push_back(std::move(matching[matching.size() - 1 - i]));
  return out;
}

storage::PhotoBlob AccessService::get_photo(std::string_view admin_token, std::string_view content_hash) const {
  require_admin(admin_token);
  auto blob = store_.get_photo(content_hash);
  if (!blob) throw Error(Errc::not_found, "no photo " + std::string(content_hash));
  return std::move(*blob);
}

std::shared_ptr<feed::Subscription> AccessService::subscribe(std::string_view admin_token, EventFilter filter,
                                                             std::optional<std::size_t> buffer) {
  require_admin(admin_token);
  return feed_.subscribe(std::move(filter), buffer);
}

void AccessService::unsubscribe(std::uint64_t subscriber_id) { feed_.unsubscribe(subscriber_id); }

}  // namespace gatekeeper::service
