// SPDX-License-Identifier: Apache-2.0
#pragma once

// Line-oriented check-in scripts; grammar in docs/formats.md.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gatekeeper/client.hpp"
#include "gatekeeper/policy.hpp"
#include "gatekeeper/service.hpp"
#include "gatekeeper/time.hpp"

namespace gatekeeper::scenario {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ExpectationFailed : public std::runtime_error {
 public:
  ExpectationFailed(std::vector<std::string> step_ids, const std::string& message)
      : std::runtime_error(message), step_ids_(std::move(step_ids)) {}
  const std::vector<std::string>& step_ids() const { return step_ids_; }

 private:
  std::vector<std::string> step_ids_;
};

struct RegisterGate {
  std::string alias;
  std::string location;
};

struct RegisterUser {
  std::string actor;
  std::string first_name;
  std::string last_name;
  std::filesystem::path photo;
};

struct UpsertPolicy {
  std::string actor;
  std::string gate;
  bool enabled = true;
  /// Either relative to the step time or absolute; empty means none.
  std::optional<std::chrono::seconds> expires_in;
  std::optional<Timestamp> expires_at;
};

struct Checkin {
  std::string id;
  std::string actor;
  std::string gate;
  /// Empty path: no photo sent.
  std::filesystem::path photo;
  /// Present a tag carrying some other organization's GUID.
  bool foreign_org = false;
  std::optional<std::uint32_t> gate_id_override;
};

struct Expect {
  std::string checkin_id;
  bool granted = true;
  policy::DenyReason reason = policy::DenyReason::no_policy;
};

using Action = std::variant<RegisterGate, RegisterUser, UpsertPolicy, Checkin, Expect>;

struct Step {
  std::size_t line = 0;
  std::chrono::seconds offset{0};
  Action action;
};

struct Scenario {
  Timestamp epoch{};
  std::uint64_t seed = 1;
  std::vector<Step> steps;
};

/// Photo paths are resolved against `base_dir`.
Scenario parse(std::istream& in, const std::filesystem::path& base_dir = {});
Scenario parse_file(const std::filesystem::path& path);

struct ExpectResult {
  std::size_t line = 0;
  std::string checkin_id;
  std::string expected;
  std::string actual;
  bool passed = false;
};

struct Report {
  std::vector<ExpectResult> expectations;
  /// Result of every checkin step by id.
  std::map<std::string, service::CheckinResult> checkins;
  std::map<std::string, policy::GateId> gates;
  std::map<std::string, policy::UserId> users;
  /// Virtual window covered by the run: [epoch, last step + 1 s).
  Timestamp started{};
  Timestamp finished{};

  bool all_passed() const;
  std::size_t failed() const;
  /// Throws ExpectationFailed naming every failed step.
  void require_all_passed() const;
};

/// Executes against a server running in test mode (virtual time header).
Report run(const Scenario& scenario, client::ApiClient& api);

/// PASS/FAIL line per expectation plus a summary line.
void print_report(const Report& report, std::ostream& out);

}  // namespace gatekeeper::scenario
