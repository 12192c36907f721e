// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gatekeeper/policy.hpp"
#include "gatekeeper/time.hpp"

namespace gatekeeper {

namespace policy {
/// {"outcome": "granted"} or {"outcome": "denied", "reason": "<reason>"}.
void to_json(nlohmann::json& j, const AccessDecision& d);
}  // namespace policy

/// One check-in attempt, granted or denied.
struct AccessEvent {
  std::uint64_t event_seq = 0;
  policy::UserId user_id;
  /// Gate as resolved in this organization; empty for unknown_org and
  /// unknown_gate denials.
  std::optional<policy::GateId> gate_id;
  /// Gate id exactly as read from the tag.
  std::uint32_t claimed_gate_id = 0;
  /// Server decision time.
  Timestamp timestamp{};
  /// Device-reported time, kept for diagnostics only.
  std::optional<Timestamp> client_time;
  policy::AccessDecision decision = policy::AccessDecision::grant();
  std::optional<std::string> gate_photo;
  /// Registration photo at the time of the event.
  std::string registration_photo;

  friend bool operator==(const AccessEvent&, const AccessEvent&) = default;
};

/// Conjunction of the present fields. Time window is half-open [from, to).
struct EventFilter {
  std::optional<Timestamp> time_from;
  std::optional<Timestamp> time_to;
  std::optional<policy::GateId> gate_id;
  std::optional<policy::UserId> user_id;
  bool denied_only = false;

  bool valid_range() const { return !time_from || !time_to || *time_from <= *time_to; }

  bool matches(const AccessEvent& event) const;
  /// Same as matches() minus the time window; used for live subscriptions.
  bool matches_ignoring_time(const AccessEvent& event) const;
};

struct Page {
  /// 1-based.
  std::size_t number = 1;
  std::size_t size = 100;
};

inline constexpr std::size_t kMaxPageSize = 1000;

policy::AccessDecision decision_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const AccessEvent& e);
void from_json(const nlohmann::json& j, AccessEvent& e);

}  // namespace gatekeeper
