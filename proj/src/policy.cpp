// SPDX-License-Identifier: Apache-2.0
#include "gatekeeper/policy.hpp"

#include <algorithm>
#include <cctype>
#include <tuple>

namespace gatekeeper::policy {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::unknown_user: return "UnknownUser";
    case Errc::unknown_gate: return "UnknownGate";
    case Errc::missing_expiration: return "MissingExpiration";
    case Errc::duplicate_name: return "DuplicateName";
    case Errc::missing_name: return "MissingName";
    case Errc::missing_photo: return "MissingPhoto";
  }
  return "Unknown";
}

namespace {

constexpr std::pair<DenyReason, std::string_view> kReasonNames[] = {
    {DenyReason::unknown_org, "unknown_org"},
    {DenyReason::unknown_gate, "unknown_gate"},
    {DenyReason::unknown_user, "unknown_user"},
    {DenyReason::no_policy, "no_policy"},
    {DenyReason::policy_disabled, "policy_disabled"},
    {DenyReason::policy_expired, "policy_expired"},
    {DenyReason::missing_photo, "missing_photo"},
};

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::string_view to_string(DenyReason reason) {
  for (auto [r, name] : kReasonNames)
    if (r == reason) return name;
  return "unknown";
}

std::optional<DenyReason> parse_deny_reason(std::string_view text) {
  for (auto [r, name] : kReasonNames)
    if (name == text) return r;
  return std::nullopt;
}

std::string describe(const AccessDecision& decision) {
  if (decision.granted()) return "granted";
  return "denied " + std::string(to_string(*decision.reason()));
}

const AccessPolicy* PolicySet::find(const UserId& user, GateId gate) const {
  auto it = policies_.find(Key{user, gate});
  return it == policies_.end() ? nullptr : &it->second;
}

void PolicySet::put(AccessPolicy policy) {
  Key key{policy.user_id, policy.gate_id};
  policies_.insert_or_assign(std::move(key), std::move(policy));
}

AccessDecision decide_access(const PolicySet& policies, const UserId& user, GateId gate, Timestamp now) {
  const AccessPolicy* p = policies.find(user, gate);
  if (!p) return AccessDecision::deny(DenyReason::no_policy);
  if (!p->enabled) return AccessDecision::deny(DenyReason::policy_disabled);
  if (now >= p->expires_at) return AccessDecision::deny(DenyReason::policy_expired);
  return AccessDecision::grant();
}

const User* AccessRegistry::find_user(const UserId& id) const {
  auto it = users_.find(id);
  return it == users_.end() ? nullptr : &it->second;
}

const Gate* AccessRegistry::find_gate(GateId id) const {
  auto it = gates_.find(id);
  return it == gates_.end() ? nullptr : &it->second;
}

const Gate* AccessRegistry::find_gate_by_name(std::string_view name) const {
  for (const auto& [id, gate] : gates_)
    if (gate.name == name) return &gate;
  return nullptr;
}

Gate AccessRegistry::add_gate(std::string name, std::string location) {
  if (blank(name)) throw Error(Errc::missing_name, "gate name");
  if (find_gate_by_name(name)) throw Error(Errc::duplicate_name, name);
  Gate gate{next_gate_id_, std::move(name), std::move(location)};
  gates_.emplace(gate.id, gate);
  ++next_gate_id_;
  return gate;
}

User AccessRegistry::add_user(std::string first_name, std::string last_name, std::string registration_photo) {
  if (blank(first_name)) throw Error(Errc::missing_name, "first name");
  if (blank(last_name)) throw Error(Errc::missing_name, "last name");
  if (registration_photo.empty()) throw Error(Errc::missing_photo);
  User user{UserId{"u" + std::to_string(next_user_number_)}, std::move(first_name), std::move(last_name),
            std::move(registration_photo)};
  users_.emplace(user.id, user);
  ++next_user_number_;
  return user;
}

void AccessRegistry::update_user(const User& user) {
  auto it = users_.find(user.id);
  if (it == users_.end()) throw Error(Errc::unknown_user, user.id.value);
  if (blank(user.first_name) || blank(user.last_name)) throw Error(Errc::missing_name);
  if (user.registration_photo.empty()) throw Error(Errc::missing_photo);
  it->second = user;
}

AccessPolicy AccessRegistry::upsert_policy(const UserId& user, GateId gate, bool enabled,
                                           std::optional<Timestamp> expires_at) {
  if (!find_user(user)) throw Error(Errc::unknown_user, user.value);
  if (!find_gate(gate)) throw Error(Errc::unknown_gate, std::to_string(gate));
  if (!expires_at) throw Error(Errc::missing_expiration);
  AccessPolicy p{user, gate, enabled, *expires_at};
  policies_.put(p);
  return p;
}

std::vector<PolicyListing> AccessRegistry::list_policies_for_gate(GateId gate) const {
  if (!find_gate(gate)) throw Error(Errc::unknown_gate, std::to_string(gate));
  std::vector<PolicyListing> out;
  for (const auto& [key, p] : policies_)
    if (p.gate_id == gate) out.push_back({*find_user(p.user_id), p});
  std::sort(out.begin(), out.end(), [](const PolicyListing& a, const PolicyListing& b) {
    return std::tie(a.user.last_name, a.user.first_name, a.user.id) <
           std::tie(b.user.last_name, b.user.first_name, b.user.id);
  });
  return out;
}

AccessRegistry AccessRegistry::restore(std::vector<User> users, std::vector<Gate> gates,
                                       std::vector<AccessPolicy> policies, GateId next_gate_id,
                                       std::uint64_t next_user_number) {
  AccessRegistry r;
  for (auto& u : users) {
    UserId id = u.id;
    r.users_.emplace(std::move(id), std::move(u));
  }
  for (auto& g : gates) {
    if (g.id >= next_gate_id) throw Error(Errc::unknown_gate, "gate id beyond allocation counter");
    r.gates_.emplace(g.id, std::move(g));
  }
  for (auto& p : policies) {
    if (!r.find_user(p.user_id)) throw Error(Errc::unknown_user, p.user_id.value);
    if (!r.find_gate(p.gate_id)) throw Error(Errc::unknown_gate, std::to_string(p.gate_id));
    r.policies_.put(std::move(p));
  }
  r.next_gate_id_ = next_gate_id;
  r.next_user_number_ = next_user_number;
  return r;
}

}  // namespace gatekeeper::policy
