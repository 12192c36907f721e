// SPDX-License-Identifier: Apache-2.0
#include "gatekeeper/events.hpp"

#include <stdexcept>

namespace gatekeeper {

using nlohmann::json;

bool EventFilter::matches_ignoring_time(const AccessEvent& e) const {
  if (gate_id && e.gate_id != gate_id) return false;
  if (user_id && e.user_id != *user_id) return false;
  if (denied_only && e.decision.granted()) return false;
  return true;
}

bool EventFilter::matches(const AccessEvent& e) const {
  if (time_from && e.timestamp < *time_from) return false;
  if (time_to && e.timestamp >= *time_to) return false;
  return matches_ignoring_time(e);
}

void policy::to_json(json& j, const policy::AccessDecision& d) {
  j = json{{"outcome", d.granted() ? "granted" : "denied"}};
  if (!d.granted()) j["reason"] = policy::to_string(*d.reason());
}

policy::AccessDecision decision_from_json(const json& j) {
  const auto outcome = j.at("outcome").get<std::string>();
  if (outcome == "granted") return policy::AccessDecision::grant();
  if (outcome != "denied") throw std::invalid_argument("bad decision outcome: " + outcome);
  auto reason = policy::parse_deny_reason(j.at("reason").get<std::string>());
  if (!reason) throw std::invalid_argument("bad deny reason");
  return policy::AccessDecision::deny(*reason);
}

void to_json(json& j, const AccessEvent& e) {
  j = json{
      {"event_seq", e.event_seq},
      {"user_id", e.user_id.value},
      {"gate_id", e.gate_id ? json(*e.gate_id) : json(nullptr)},
      {"claimed_gate_id", e.claimed_gate_id},
      {"timestamp", format_utc(e.timestamp)},
      {"client_time", e.client_time ? json(format_utc(*e.client_time)) : json(nullptr)},
      {"decision", e.decision},
      {"gate_photo", e.gate_photo ? json(*e.gate_photo) : json(nullptr)},
      {"registration_photo", e.registration_photo},
  };
}

namespace {

Timestamp time_field(const json& j) {
  auto t = parse_utc(j.get<std::string>());
  if (!t) throw std::invalid_argument("bad timestamp");
  return *t;
}

}  // namespace

void from_json(const json& j, AccessEvent& e) {
  e.event_seq = j.at("event_seq").get<std::uint64_t>();
  e.user_id = policy::UserId{j.at("user_id").get<std::string>()};
  const auto& gate = j.at("gate_id");
  e.gate_id = gate.is_null() ? std::nullopt : std::optional<policy::GateId>(gate.get<policy::GateId>());
  e.claimed_gate_id = j.at("claimed_gate_id").get<std::uint32_t>();
  e.timestamp = time_field(j.at("timestamp"));
  const auto& client = j.at("client_time");
  e.client_time = client.is_null() ? std::nullopt : std::optional<Timestamp>(time_field(client));
  e.decision = decision_from_json(j.at("decision"));
  const auto& photo = j.at("gate_photo");
  e.gate_photo = photo.is_null() ? std::nullopt : std::optional<std::string>(photo.get<std::string>());
  e.registration_photo = j.at("registration_photo").get<std::string>();
}

}  // namespace gatekeeper
