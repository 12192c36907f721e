// SPDX-License-Identifier: Apache-2.0
#pragma once

// JSON shapes shared by the HTTP server and the simulator client.

#include <string>

#include <nlohmann/json.hpp>

#include "gatekeeper/events.hpp"
#include "gatekeeper/ndef.hpp"
#include "gatekeeper/policy.hpp"
#include "gatekeeper/service.hpp"

namespace gatekeeper::wire {

using nlohmann::json;

json to_json(const policy::Gate& gate);
policy::Gate gate_from_json(const json& j);

json to_json(const policy::User& user);
policy::User user_from_json(const json& j);

json to_json(const policy::AccessPolicy& policy);
policy::AccessPolicy policy_from_json(const json& j);

/// Tag payload fields with the GUID as hex.
json to_json(const ndef::GateTagPayload& tag);
ndef::GateTagPayload tag_from_json(const json& j);

json to_json(const service::GateRegistration& reg);
service::GateRegistration gate_registration_from_json(const json& j);

json to_json(const service::UserRegistration& reg);
service::UserRegistration user_registration_from_json(const json& j);

/// {"outcome": ..., ["reason": ...,] "event_seq": n}
json to_json(const service::CheckinResult& result);
service::CheckinResult checkin_result_from_json(const json& j);

/// "active", "disabled" or "expired" at `now`.
std::string policy_status(const policy::AccessPolicy& policy, Timestamp now);

/// Feed frames, one JSON object per line.
json event_frame(const AccessEvent& event);
json heartbeat_frame(Timestamp now);
json overflow_frame();

/// Throws std::invalid_argument on malformed input.
ndef::Guid guid_from_hex(const std::string& hex);

}  // namespace gatekeeper::wire
