// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gatekeeper/error.hpp"
#include "gatekeeper/time.hpp"

namespace gatekeeper::policy {

enum class Errc {
  unknown_user,
  unknown_gate,
  missing_expiration,
  duplicate_name,
  missing_name,
  missing_photo,
};

std::string_view to_string(Errc code);

using Error = BasicError<Errc>;

struct UserId {
  std::string value;

  friend auto operator<=>(const UserId&, const UserId&) = default;
};

/// Server-assigned, allocated from 1 upward and never reused.
using GateId = std::uint32_t;

struct User {
  UserId id;
  std::string first_name;
  std::string last_name;
  /// Hex content hash of the registration photo in the blob store.
  std::string registration_photo;

  friend bool operator==(const User&, const User&) = default;
};

struct Gate {
  GateId id = 0;
  std::string name;
  std::string location;

  friend bool operator==(const Gate&, const Gate&) = default;
};

struct AccessPolicy {
  UserId user_id;
  GateId gate_id = 0;
  bool enabled = true;
  Timestamp expires_at{};

  friend bool operator==(const AccessPolicy&, const AccessPolicy&) = default;
};

enum class DenyReason {
  unknown_org,
  unknown_gate,
  unknown_user,
  no_policy,
  policy_disabled,
  policy_expired,
  missing_photo,
};

std::string_view to_string(DenyReason reason);
std::optional<DenyReason> parse_deny_reason(std::string_view text);

/// Granted, or denied with exactly one reason.
class AccessDecision {
 public:
  static AccessDecision grant() { return AccessDecision{}; }
  static AccessDecision deny(DenyReason reason) { return AccessDecision{reason}; }

  bool granted() const { return !reason_; }
  const std::optional<DenyReason>& reason() const { return reason_; }

  friend bool operator==(const AccessDecision&, const AccessDecision&) = default;

 private:
  AccessDecision() = default;
  explicit AccessDecision(DenyReason reason) : reason_(reason) {}

  std::optional<DenyReason> reason_;
};

/// "granted" or "denied <reason>".
std::string describe(const AccessDecision& decision);

/// At most one policy per (user, gate).
class PolicySet {
 public:
  using Key = std::pair<UserId, GateId>;

  const AccessPolicy* find(const UserId& user, GateId gate) const;
  /// Inserts or replaces the policy for its (user, gate) pair.
  void put(AccessPolicy policy);

  std::size_t size() const { return policies_.size(); }
  auto begin() const { return policies_.begin(); }
  auto end() const { return policies_.end(); }

 private:
  std::map<Key, AccessPolicy> policies_;
};

/// Granted iff an enabled policy exists and `now < expires_at`. Expiry is
/// evaluated here, at decision time; nothing rewrites stored policies.
AccessDecision decide_access(const PolicySet& policies, const UserId& user, GateId gate, Timestamp now);

struct PolicyListing {
  User user;
  AccessPolicy policy;
};

/// Users, gates, and the policies linking them for one organization.
class AccessRegistry {
 public:
  const User* find_user(const UserId& id) const;
  const Gate* find_gate(GateId id) const;
  const Gate* find_gate_by_name(std::string_view name) const;

  const std::map<UserId, User>& users() const { return users_; }
  const std::map<GateId, Gate>& gates() const { return gates_; }
  const PolicySet& policies() const { return policies_; }

  /// Allocates the next gate id. Names are unique within the registry.
  Gate add_gate(std::string name, std::string location);

  /// Allocates the next user id ("u1", "u2", ...).
  User add_user(std::string first_name, std::string last_name, std::string registration_photo);

  /// Replaces an existing user's record, keeping the id.
  void update_user(const User& user);

  AccessPolicy upsert_policy(const UserId& user, GateId gate, bool enabled,
                             std::optional<Timestamp> expires_at);

  /// Every policy on the gate, active or not, sorted by last name, first
  /// name, then user id.
  std::vector<PolicyListing> list_policies_for_gate(GateId gate) const;

  // Allocation counters, exposed for persistence.
  GateId next_gate_id() const { return next_gate_id_; }
  std::uint64_t next_user_number() const { return next_user_number_; }

  /// Rebuilds a registry from persisted parts, validating references.
  static AccessRegistry restore(std::vector<User> users, std::vector<Gate> gates,
                                std::vector<AccessPolicy> policies, GateId next_gate_id,
                                std::uint64_t next_user_number);

 private:
  std::map<UserId, User> users_;
  std::map<GateId, Gate> gates_;
  PolicySet policies_;
  GateId next_gate_id_ = 1;
  std::uint64_t next_user_number_ = 1;
};

}  // namespace gatekeeper::policy
