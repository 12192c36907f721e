// SPDX-License-Identifier: Apache-2.0
#include "gatekeeper/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "gatekeeper/simulator.hpp"

namespace gatekeeper::scenario {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> tokenize(const std::string& line, std::size_t line_no) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> std::ws && !in.eof()) {
    if (in.peek() == '"') {
      if (!(in >> std::quoted(tok))) throw ParseError(line_no, "unterminated quote");
    } else {
      in >> tok;
    }
    out.push_back(tok);
  }
  if (std::count(line.begin(), line.end(), '"') % 2 != 0) throw ParseError(line_no, "unterminated quote");
  return out;
}

std::optional<std::uint64_t> parse_uint(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// "+90", "+90s", "+15m", "+2h", "+1d" or "90".
std::optional<std::chrono::seconds> parse_duration(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  std::int64_t unit = 1;
  if (!s.empty()) {
    switch (s.back()) {
      case 's': unit = 1; s.remove_suffix(1); break;
      case 'm': unit = 60; s.remove_suffix(1); break;
      case 'h': unit = 3600; s.remove_suffix(1); break;
      case 'd': unit = 86400; s.remove_suffix(1); break;
      default: break;
    }
  }
  auto n = parse_uint(s);
  if (!n) return std::nullopt;
  return std::chrono::seconds(static_cast<std::int64_t>(*n) * unit);
}

class Parser {
 public:
  Parser(fs::path base) : base_(std::move(base)) {}

  void line(std::size_t no, const std::string& text) {
    auto toks = tokenize(text, no);
    if (toks.empty() || toks[0].empty() || toks[0].front() == '#') return;
    no_ = no;

    if (toks[0] == "epoch") {
      arity(toks, 2, 2);
      if (!steps_.empty()) fail("epoch must come before the first step");
      auto t = parse_utc(toks[1]);
      if (!t) fail("bad epoch time '" + toks[1] + "'");
      out_.epoch = *t;
      return;
    }
    if (toks[0] == "seed") {
      arity(toks, 2, 2);
      if (!steps_.empty()) fail("seed must come before the first step");
      auto v = parse_uint(toks[1]);
      if (!v) fail("bad seed '" + toks[1] + "'");
      out_.seed = *v;
      return;
    }

    std::size_t i = 0;
    if (toks[0] == "at") {
      if (toks.size() < 3) fail("'at' needs an offset and an action");
      auto d = parse_duration(toks[1]);
      if (!d) fail("bad offset '" + toks[1] + "'");
      if (*d < offset_) fail("offset goes backwards");
      offset_ = *d;
      i = 2;
    }
    std::vector<std::string> args(toks.begin() + static_cast<std::ptrdiff_t>(i), toks.end());
    Step step{no, offset_, action(args)};
    steps_.push_back(std::move(step));
  }

  Scenario finish() {
    out_.steps = std::move(steps_);
    return std::move(out_);
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(no_, message); }

  void arity(const std::vector<std::string>& args, std::size_t min, std::size_t max) const {
    if (args.size() < min || args.size() > max)
      fail("'" + args[0] + "' takes " + std::to_string(min - 1) +
           (min == max ? "" : "-" + std::to_string(max - 1)) + " arguments");
  }

  void need_actor(const std::string& a) const {
    if (!actors_.count(a)) fail("unknown actor '" + a + "'");
  }
  void need_gate(const std::string& g) const {
    if (!gates_.count(g)) fail("unknown gate '" + g + "'");
  }

  fs::path photo_path(const std::string& p) const { return base_.empty() ? fs::path(p) : base_ / p; }

  Action action(const std::vector<std::string>& a) {
    const std::string& verb = a[0];
    if (verb == "register_gate") {
      arity(a, 2, 3);
      if (!gates_.insert(a[1]).second) fail("gate '" + a[1] + "' already declared");
      return RegisterGate{a[1], a.size() > 2 ? a[2] : ""};
    }
    if (verb == "register_user") {
      arity(a, 5, 5);
      if (!actors_.insert(a[1]).second) fail("actor '" + a[1] + "' already declared");
      return RegisterUser{a[1], a[2], a[3], photo_path(a[4])};
    }
    if (verb == "upsert_policy") {
      arity(a, 4, 5);
      need_actor(a[1]);
      need_gate(a[2]);
      UpsertPolicy p;
      p.actor = a[1];
      p.gate = a[2];
      if (a[3] == "enabled") p.enabled = true;
      else if (a[3] == "disabled") p.enabled = false;
      else fail("expected enabled or disabled, got '" + a[3] + "'");
      if (a.size() == 5) {
        constexpr std::string_view kKey = "expires=";
        if (a[4].rfind(kKey, 0) != 0) fail("expected expires=..., got '" + a[4] + "'");
        std::string value = a[4].substr(kKey.size());
        if (value == "none") {
        } else if (!value.empty() && value.front() == '+') {
          p.expires_in = parse_duration(value);
          if (!p.expires_in) fail("bad expiry '" + value + "'");
        } else {
          p.expires_at = parse_utc(value);
          if (!p.expires_at) fail("bad expiry '" + value + "'");
        }
      }
      return p;
    }
    if (verb == "checkin") {
      if (a.size() < 5 || a.size() > 7) fail("'checkin' takes an id, actor, gate, photo and options");
      if (!checkins_.insert(a[1]).second) fail("checkin id '" + a[1] + "' reused");
      need_actor(a[2]);
      need_gate(a[3]);
      Checkin c;
      c.id = a[1];
      c.actor = a[2];
      c.gate = a[3];
      if (a[4] != "-") c.photo = photo_path(a[4]);
      for (std::size_t k = 5; k < a.size(); ++k) {
        if (a[k] == "org=foreign") c.foreign_org = true;
        else if (a[k] == "org=home") c.foreign_org = false;
        else if (a[k].rfind("gate_id=", 0) == 0) {
          auto v = parse_uint(std::string_view(a[k]).substr(8));
          if (!v || *v > UINT32_MAX) fail("bad gate_id '" + a[k] + "'");
          c.gate_id_override = static_cast<std::uint32_t>(*v);
        } else {
          fail("unknown checkin option '" + a[k] + "'");
        }
      }
      return c;
    }
    if (verb == "expect") {
      arity(a, 3, 4);
      if (!checkins_.count(a[1])) fail("expect refers to unknown checkin '" + a[1] + "'");
      Expect e{a[1]};
      if (a[2] == "granted") {
        if (a.size() != 3) fail("'granted' takes no reason");
        e.granted = true;
      } else if (a[2] == "denied") {
        if (a.size() != 4) fail("'denied' needs a reason");
        auto r = policy::parse_deny_reason(a[3]);
        if (!r) fail("unknown deny reason '" + a[3] + "'");
        e.granted = false;
        e.reason = *r;
      } else {
        fail("expected granted or denied, got '" + a[2] + "'");
      }
      return e;
    }
    fail("unknown action '" + verb + "'");
  }

  fs::path base_;
  std::size_t no_ = 0;
  std::chrono::seconds offset_{0};
  std::set<std::string> actors_, gates_, checkins_;
  std::vector<Step> steps_;
  Scenario out_;
};

ndef::Guid foreign_guid(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  ndef::Guid g{};
  for (auto& b : g) b = static_cast<std::uint8_t>(rng());
  return g;
}

std::string expected_text(const Expect& e) {
  return e.granted ? "granted" : "denied " + std::string(policy::to_string(e.reason));
}

}  // namespace

Scenario parse(std::istream& in, const fs::path& base_dir) {
  Parser parser(base_dir);
  std::string text;
  std::size_t no = 0;
  while (std::getline(in, text)) {
    ++no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    parser.line(no, text);
  }
  return parser.finish();
}

Scenario parse_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path.string());
  return parse(in, path.parent_path());
}

bool Report::all_passed() const { return failed() == 0; }

std::size_t Report::failed() const {
  return static_cast<std::size_t>(
      std::count_if(expectations.begin(), expectations.end(), [](const ExpectResult& r) { return !r.passed; }));
}

void Report::require_all_passed() const {
  std::vector<std::string> ids;
  std::string message = "expectations failed:";
  for (const auto& r : expectations) {
    if (r.passed) continue;
    ids.push_back(r.checkin_id);
    message += " " + r.checkin_id + " (line " + std::to_string(r.line) + ")";
  }
  if (!ids.empty()) throw ExpectationFailed(std::move(ids), message);
}

Report run(const Scenario& scenario, client::ApiClient& api) {
  Report report;
  report.started = scenario.epoch;
  std::map<std::string, tag::TagChip> tags;
  std::map<std::string, std::string> tokens;
  std::uint64_t tag_counter = 0;

  for (const auto& step : scenario.steps) {
    const Timestamp now = scenario.epoch + step.offset;
    report.finished = now + std::chrono::seconds(1);
    std::visit(
        [&](const auto& act) {
          using T = std::decay_t<decltype(act)>;
          if constexpr (std::is_same_v<T, RegisterGate>) {
            auto reg = api.register_gate(act.alias, act.location);
            sim::ProvisionOptions opts;
            opts.seed = scenario.seed + tag_counter++;
            tags.emplace(act.alias, sim::program_gate_tag(reg, opts));
            report.gates[act.alias] = reg.gate.id;
          } else if constexpr (std::is_same_v<T, RegisterUser>) {
            auto reg = api.register_user(act.first_name, act.last_name, sim::read_file(act.photo));
            tokens[act.actor] = reg.device_token;
            report.users[act.actor] = reg.user.id;
          } else if constexpr (std::is_same_v<T, UpsertPolicy>) {
            std::optional<Timestamp> expires = act.expires_at;
            if (act.expires_in) expires = now + *act.expires_in;
            api.upsert_policy(report.users.at(act.actor), report.gates.at(act.gate), act.enabled, expires, now);
          } else if constexpr (std::is_same_v<T, Checkin>) {
            auto payload = sim::read_gate_tag(tags.at(act.gate));
            service::CheckinRequest req;
            req.device_token = tokens.at(act.actor);
            req.server_guid = act.foreign_org ? foreign_guid(scenario.seed) : payload.server_guid;
            req.gate_id = act.gate_id_override.value_or(payload.gate_id);
            if (!act.photo.empty()) req.photo = sim::read_file(act.photo);
            req.client_time = now;
            req.time_override = now;
            report.checkins[act.id] = api.checkin(req);
          } else if constexpr (std::is_same_v<T, Expect>) {
            ExpectResult r;
            r.line = step.line;
            r.checkin_id = act.checkin_id;
            r.expected = expected_text(act);
            r.actual = policy::describe(report.checkins.at(act.checkin_id).decision);
            r.passed = r.expected == r.actual;
            report.expectations.push_back(std::move(r));
          }
        },
        step.action);
  }
  return report;
}

void print_report(const Report& report, std::ostream& out) {
  for (const auto& r : report.expectations) {
    if (r.passed)
      out << "PASS " << r.checkin_id << ": " << r.actual << '\n';
    else
      out << "FAIL " << r.checkin_id << " (line " << r.line << "): expected " << r.expected << ", got " << r.actual
          << '\n';
  }
  out << report.expectations.size() << " expectations, " << report.expectations.size() - report.failed()
      << " passed, " << report.failed() << " failed\n";
}

}  // namespace gatekeeper::scenario
