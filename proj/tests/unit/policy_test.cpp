// SPDX-License-Identifier: Apache-2.0
#include <random>

#include <gtest/gtest.h>

#include "gatekeeper/events.hpp"
#include "gatekeeper/policy.hpp"

using namespace gatekeeper;
using namespace gatekeeper::policy;
using namespace std::chrono_literals;

namespace {

Timestamp at(const char* iso) { return *parse_utc(iso); }

template <typename Fn>
std::optional<Errc> error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

struct Fixture {
  AccessRegistry reg;
  Gate lobby, lab;
  User ann, ben;

  Fixture() {
    lobby = reg.add_gate("lobby", "ground floor");
    lab = reg.add_gate("lab", "2nd floor");
    ann = reg.add_user("Ann", "Zimmer", "aa");
    ben = reg.add_user("Ben", "Adams", "bb");
  }
};

}  // namespace

TEST(Policy, IdsAreSequential) {
  Fixture f;
  EXPECT_EQ(f.lobby.id, 1u);
  EXPECT_EQ(f.lab.id, 2u);
  EXPECT_EQ(f.ann.id.value, "u1");
  EXPECT_EQ(f.ben.id.value, "u2");
}

TEST(Policy, RegistryErrors) {
  Fixture f;
  EXPECT_EQ(error_of([&] { f.reg.add_gate("lobby", "x"); }), Errc::duplicate_name);
  EXPECT_EQ(error_of([&] { f.reg.add_gate("  ", "x"); }), Errc::missing_name);
  EXPECT_EQ(error_of([&] { f.reg.add_user("", "X", "p"); }), Errc::missing_name);
  EXPECT_EQ(error_of([&] { f.reg.add_user("A", "X", ""); }), Errc::missing_photo);
  const auto t = at("2026-01-01T00:00:00Z");
  EXPECT_EQ(error_of([&] { f.reg.upsert_policy(UserId{"u9"}, f.lobby.id, true, t); }), Errc::unknown_user);
  EXPECT_EQ(error_of([&] { f.reg.upsert_policy(f.ann.id, 99, true, t); }), Errc::unknown_gate);
  EXPECT_EQ(error_of([&] { f.reg.upsert_policy(f.ann.id, f.lobby.id, true, std::nullopt); }),
            Errc::missing_expiration);
  EXPECT_EQ(error_of([&] { f.reg.list_policies_for_gate(99); }), Errc::unknown_gate);
}

TEST(Policy, DecisionOrder) {
  Fixture f;
  const auto now = at("2026-01-01T12:00:00Z");
  EXPECT_EQ(decide_access(f.reg.policies(), f.ann.id, f.lobby.id, now).reason(), DenyReason::no_policy);
  f.reg.upsert_policy(f.ann.id, f.lobby.id, false, now - 1h);
  EXPECT_EQ(decide_access(f.reg.policies(), f.ann.id, f.lobby.id, now).reason(), DenyReason::policy_disabled);
  f.reg.upsert_policy(f.ann.id, f.lobby.id, true, now - 1h);
  EXPECT_EQ(decide_access(f.reg.policies(), f.ann.id, f.lobby.id, now).reason(), DenyReason::policy_expired);
  f.reg.upsert_policy(f.ann.id, f.lobby.id, true, now + 1h);
  EXPECT_TRUE(decide_access(f.reg.policies(), f.ann.id, f.lobby.id, now).granted());
  // Policies are per gate.
  EXPECT_EQ(decide_access(f.reg.policies(), f.ann.id, f.lab.id, now).reason(), DenyReason::no_policy);
}

TEST(Policy, ExpiryIsHalfOpen) {
  Fixture f;
  const auto expiry = at("2026-06-30T17:00:00Z");
  f.reg.upsert_policy(f.ann.id, f.lobby.id, true, expiry);
  // Sweep a window around the boundary at millisecond resolution.
  for (auto d = -2000ms; d <= 2000ms; d += 1ms) {
    auto decision = decide_access(f.reg.policies(), f.ann.id, f.lobby.id, expiry + d);
    ASSERT_EQ(decision.granted(), d < 0ms) << d.count();
    if (!decision.granted()) ASSERT_EQ(decision.reason(), DenyReason::policy_expired);
  }
}

TEST(Policy, GrantIsMonotoneInTime) {
  std::mt19937_64 rng(3);
  Fixture f;
  for (int i = 0; i < 200; ++i) {
    const auto expiry = at("2026-01-01T00:00:00Z") + std::chrono::seconds(rng() % 100000);
    f.reg.upsert_policy(f.ann.id, f.lobby.id, true, expiry);
    bool denied_seen = false;
    for (int k = 0; k < 50; ++k) {
      const auto t = at("2026-01-01T00:00:00Z") + std::chrono::seconds(k * 2000);
      bool granted = decide_access(f.reg.policies(), f.ann.id, f.lobby.id, t).granted();
      if (denied_seen) ASSERT_FALSE(granted);
      denied_seen = denied_seen || !granted;
    }
  }
}

TEST(Policy, UpsertReplaces) {
  Fixture f;
  const auto t = at("2026-01-01T00:00:00Z");
  f.reg.upsert_policy(f.ann.id, f.lobby.id, true, t);
  f.reg.upsert_policy(f.ann.id, f.lobby.id, false, t + 24h);
  EXPECT_EQ(f.reg.policies().size(), 1u);
  const auto* p = f.reg.policies().find(f.ann.id, f.lobby.id);
  ASSERT_NE(p, nullptr);
  EXPECT_FALSE(p->enabled);
  EXPECT_EQ(p->expires_at, t + 24h);
}

TEST(Policy, ListingSortedByName) {
  Fixture f;
  const auto t = at("2026-01-01T00:00:00Z");
  auto cy = f.reg.add_user("Cy", "Adams", "cc");
  f.reg.upsert_policy(f.ann.id, f.lobby.id, true, t);
  f.reg.upsert_policy(cy.id, f.lobby.id, true, t);
  f.reg.upsert_policy(f.ben.id, f.lobby.id, false, t);
  f.reg.upsert_policy(f.ben.id, f.lab.id, true, t);
  auto rows = f.reg.list_policies_for_gate(f.lobby.id);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].user.id, f.ben.id);
  EXPECT_EQ(rows[1].user.id, cy.id);
  EXPECT_EQ(rows[2].user.id, f.ann.id);
}

TEST(Policy, RestoreRoundTrip) {
  Fixture f;
  const auto t = at("2026-01-01T00:00:00Z");
  f.reg.upsert_policy(f.ann.id, f.lab.id, true, t);
  std::vector<User> users;
  for (const auto& [id, u] : f.reg.users()) users.push_back(u);
  std::vector<Gate> gates;
  for (const auto& [id, g] : f.reg.gates()) gates.push_back(g);
  std::vector<AccessPolicy> policies;
  for (const auto& [k, p] : f.reg.policies()) policies.push_back(p);
  auto copy = AccessRegistry::restore(users, gates, policies, f.reg.next_gate_id(), f.reg.next_user_number());
  EXPECT_EQ(copy.add_gate("new", "").id, 3u);
  EXPECT_EQ(copy.add_user("N", "N", "p").id.value, "u3");
  EXPECT_NE(copy.policies().find(f.ann.id, f.lab.id), nullptr);
  policies.push_back(AccessPolicy{UserId{"u42"}, 1, true, t});
  EXPECT_EQ(error_of([&] { AccessRegistry::restore(users, gates, policies, 3, 3); }), Errc::unknown_user);
}

TEST(Policy, DenyReasonNames) {
  for (auto r : {DenyReason::unknown_org, DenyReason::unknown_gate, DenyReason::unknown_user, DenyReason::no_policy,
                 DenyReason::policy_disabled, DenyReason::policy_expired, DenyReason::missing_photo})
    EXPECT_EQ(parse_deny_reason(to_string(r)), r);
  EXPECT_EQ(describe(AccessDecision::deny(DenyReason::policy_expired)), "denied policy_expired");
  EXPECT_EQ(describe(AccessDecision::grant()), "granted");
}

TEST(EventFilter, HalfOpenWindowAndConjunction) {
  AccessEvent e;
  e.user_id = UserId{"u1"};
  e.gate_id = 2;
  e.timestamp = at("2026-01-01T10:00:00Z");
  e.decision = AccessDecision::deny(DenyReason::no_policy);

  EventFilter f;
  EXPECT_TRUE(f.matches(e));
  f.time_from = e.timestamp;
  EXPECT_TRUE(f.matches(e));
  f.time_to = e.timestamp;
  EXPECT_FALSE(f.matches(e));
  EXPECT_TRUE(f.matches_ignoring_time(e));
  f.time_to = e.timestamp + 1ms;
  EXPECT_TRUE(f.matches(e));
  f.gate_id = 3;
  EXPECT_FALSE(f.matches(e));
  f.gate_id = 2;
  f.user_id = UserId{"u2"};
  EXPECT_FALSE(f.matches(e));
  f.user_id = UserId{"u1"};
  f.denied_only = true;
  EXPECT_TRUE(f.matches(e));
  e.decision = AccessDecision::grant();
  EXPECT_FALSE(f.matches(e));

  // Unresolved gate never matches a gate filter.
  e.gate_id.reset();
  EventFilter g;
  g.gate_id = 2;
  EXPECT_FALSE(g.matches(e));

  EventFilter bad;
  bad.time_from = e.timestamp + 1s;
  bad.time_to = e.timestamp;
  EXPECT_FALSE(bad.valid_range());
}

TEST(EventJson, RoundTrip) {
  AccessEvent e;
  e.event_seq = 4;
  e.user_id = UserId{"u3"};
  e.claimed_gate_id = 77;
  e.timestamp = at("2026-01-01T10:00:00.250Z");
  e.decision = AccessDecision::deny(DenyReason::unknown_gate);
  e.registration_photo = "ab";
  nlohmann::json j = e;
  EXPECT_TRUE(j["gate_id"].is_null());
  EXPECT_EQ(j["timestamp"], "2026-01-01T10:00:00.250Z");
  EXPECT_EQ(j.get<AccessEvent>(), e);
  e.gate_id = 77;
  e.gate_photo = "cd";
  e.client_time = e.timestamp - 3s;
  e.decision = AccessDecision::grant();
  j = e;
  EXPECT_EQ(j.get<AccessEvent>(), e);
}
