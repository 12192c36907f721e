// SPDX-License-Identifier: Apache-2.0
#include "gatekeeper/wire.hpp"

#include <algorithm>
#include <stdexcept>

namespace gatekeeper::wire {

namespace {

Timestamp time_from(const json& j) {
  auto t = parse_utc(j.get<std::string>());
  if (!t) throw std::invalid_argument("bad timestamp: " + j.get<std::string>());
  return *t;
}

}  // namespace

ndef::Guid guid_from_hex(const std::string& hex) {
  auto bytes = from_hex(hex);
  if (!bytes || bytes->size() != 16) throw std::invalid_argument("server_guid must be 32 hex digits");
  ndef::Guid guid{};
  std::copy(bytes->begin(), bytes->end(), guid.begin());
  return guid;
}

json to_json(const policy::Gate& g) { return {{"id", g.id}, {"name", g.name}, {"location", g.location}}; }

policy::Gate gate_from_json(const json& j) {
  return {j.at("id").get<policy::GateId>(), j.at("name").get<std::string>(), j.at("location").get<std::string>()};
}

json to_json(const policy::User& u) {
  return {{"id", u.id.value},
          {"first_name", u.first_name},
          {"last_name", u.last_name},
          {"registration_photo", u.registration_photo}};
}

policy::User user_from_json(const json& j) {
  return {policy::UserId{j.at("id").get<std::string>()}, j.at("first_name").get<std::string>(),
          j.at("last_name").get<std::string>(), j.at("registration_photo").get<std::string>()};
}

json to_json(const policy::AccessPolicy& p) {
  return {{"user_id", p.user_id.value},
          {"gate_id", p.gate_id},
          {"enabled", p.enabled},
          {"expires_at", format_utc(p.expires_at)}};
}

policy::AccessPolicy policy_from_json(const json& j) {
  return {policy::UserId{j.at("user_id").get<std::string>()}, j.at("gate_id").get<policy::GateId>(),
          j.at("enabled").get<bool>(), time_from(j.at("expires_at"))};
}

json to_json(const ndef::GateTagPayload& t) {
  return {{"server_guid", to_hex(t.server_guid)},
          {"gate_id", t.gate_id},
          {"android_app_id", t.android_app_id},
          {"universal_link", t.universal_link}};
}

ndef::GateTagPayload tag_from_json(const json& j) {
  ndef::GateTagPayload t;
  t.server_guid = guid_from_hex(j.at("server_guid").get<std::string>());
  t.gate_id = j.at("gate_id").get<std::uint32_t>();
  t.android_app_id = j.at("android_app_id").get<std::string>();
  t.universal_link = j.at("universal_link").get<std::string>();
  return t;
}

json to_json(const service::GateRegistration& r) {
  return {{"gate", to_json(r.gate)}, {"tag", to_json(r.tag)}, {"tag_password", to_hex(r.tag_password)}};
}

service::GateRegistration gate_registration_from_json(const json& j) {
  service::GateRegistration r;
  r.gate = gate_from_json(j.at("gate"));
  r.tag = tag_from_json(j.at("tag"));
  auto pw = from_hex(j.at("tag_password").get<std::string>());
  if (!pw || pw->size() != r.tag_password.size()) throw std::invalid_argument("tag_password must be 8 hex digits");
  std::copy(pw->begin(), pw->end(), r.tag_password.begin());
  return r;
}

json to_json(const service::UserRegistration& r) {
  return {{"user", to_json(r.user)}, {"device_token", r.device_token}};
}

service::UserRegistration user_registration_from_json(const json& j) {
  return {user_from_json(j.at("user")), j.at("device_token").get<std::string>()};
}

json to_json(const service::CheckinResult& r) {
  json j = r.decision;
  j["event_seq"] = r.event_seq;
  return j;
}

service::CheckinResult checkin_result_from_json(const json& j) {
  service::CheckinResult r;
  r.decision = decision_from_json(j);
  r.event_seq = j.at("event_seq").get<std::uint64_t>();
  return r;
}

std::string policy_status(const policy::AccessPolicy& p, Timestamp now) {
  if (!p.enabled) return "disabled";
  return now < p.expires_at ? "active" : "expired";
}

json event_frame(const AccessEvent& event) {
  json j = event;
  j["type"] = "event";
  return j;
}

json heartbeat_frame(Timestamp now) { return {{"type", "heartbeat"}, {"time", format_utc(now)}}; }

json overflow_frame() { return {{"type", "error"}, {"reason", "overflow"}}; }

}  // namespace gatekeeper::wire
