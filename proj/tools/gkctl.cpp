// SPDX-License-Identifier: Apache-2.0
// Simulated admin device and phone: provisions tag images, checks in with
// them, and runs scripted scenarios.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "gatekeeper/client.hpp"
#include "gatekeeper/ndef.hpp"
#include "gatekeeper/scenario.hpp"
#include "gatekeeper/simulator.hpp"
#include "gatekeeper/tag.hpp"

using namespace gatekeeper;

namespace {

struct Endpoint {
  std::string host;
  int port = 80;
};

Endpoint parse_server(std::string url) {
  constexpr std::string_view kScheme = "http://";
  if (url.rfind(kScheme, 0) == 0) url.erase(0, kScheme.size());
  while (!url.empty() && url.back() == '/') url.pop_back();
  Endpoint ep{url, 80};
  if (auto colon = url.rfind(':'); colon != std::string::npos) {
    ep.host = url.substr(0, colon);
    ep.port = std::stoi(url.substr(colon + 1));
  }
  if (ep.host.empty()) throw std::invalid_argument("bad server URL");
  return ep;
}

std::string tnf_name(ndef::Tnf tnf) {
  switch (tnf) {
    case ndef::Tnf::empty: return "empty";
    case ndef::Tnf::well_known: return "well-known";
    case ndef::Tnf::mime_media: return "mime";
    case ndef::Tnf::absolute_uri: return "absolute-uri";
    case ndef::Tnf::external: return "external";
    case ndef::Tnf::unknown: return "unknown";
    case ndef::Tnf::unchanged: return "unchanged";
  }
  return "?";
}

void dump_tag(const tag::TagChip& chip) {
  std::cout << "standard:  " << tag::to_string(chip.standard()) << " (" << chip.capacity() << " bytes)\n"
            << "uid:       " << to_hex(chip.uid()) << '\n'
            << "password:  " << (chip.password() ? "set" : "none") << '\n'
            << "read-only: " << (chip.read_only() ? "yes" : "no") << '\n'
            << "used:      " << chip.memory().size() << " bytes\n\n"
            << hex_dump(chip.memory()) << '\n';
  if (chip.memory().empty()) return;
  auto message = ndef::decode_message(chip.read_ndef());
  for (std::size_t i = 0; i < message.records.size(); ++i) {
    const auto& r = message.records[i];
    std::cout << "record " << i << ": tnf=" << tnf_name(r.tnf) << " type=" << to_string(r.type)
              << " payload=" << r.payload.size() << " bytes\n";
  }
  try {
    auto p = ndef::parse_gate_tag_message(message);
    std::cout << "\nserver_guid:    " << to_hex(p.server_guid) << '\n'
              << "gate_id:        " << p.gate_id << '\n'
              << "android_app_id: " << p.android_app_id << '\n'
              << "universal_link: " << p.universal_link << '\n';
  } catch (const ndef::Error& e) {
    std::cout << "\nnot a gate tag: " << e.what() << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gkctl - simulated admin device and phone"};
  app.require_subcommand(1);

  std::string server = "http://127.0.0.1:8080";
  std::string admin_token;
  app.add_option("--server", server, "Server URL")->envname("GATEKEEPER_URL")->capture_default_str();
  app.add_option("--admin-token", admin_token, "Admin bearer token")->envname("GATEKEEPER_ADMIN_TOKEN");

  auto* provision = app.add_subcommand("provision-tag", "Register a gate and write its tag image");
  std::string gate_name, location, standard_name = "ntag213", out_path;
  bool lock = false;
  std::optional<std::uint64_t> seed;
  provision->add_option("--name", gate_name, "Gate name")->required();
  provision->add_option("--location", location, "Gate location");
  provision->add_option("--standard", standard_name, "ntag213 or ntag216")
      ->check(CLI::IsMember({"ntag213", "ntag216"}))
      ->capture_default_str();
  provision->add_option("--out", out_path, "Tag image file to create")->required();
  provision->add_flag("--lock", lock, "Lock the tag read-only after writing");
  provision->add_option("--seed", seed, "Seed for a reproducible tag UID");

  auto* dump = app.add_subcommand("dump-tag", "Show a tag image");
  std::string dump_path;
  dump->add_option("image", dump_path, "Tag image file")->required()->check(CLI::ExistingFile);

  auto* checkin = app.add_subcommand("checkin", "Check in by reading a tag image");
  std::string device_token, tag_path, photo_path, at;
  checkin->add_option("--token", device_token, "Device token")->required()->envname("GATEKEEPER_DEVICE_TOKEN");
  checkin->add_option("--tag", tag_path, "Tag image file")->required();
  checkin->add_option("--photo", photo_path, "Gate photo (PNG or JPEG)")->required();
  checkin->add_option("--at", at, "Virtual decision time (server must run in test mode)");

  auto* run = app.add_subcommand("run-scenario", "Run a scenario script against a test-mode server");
  std::string scenario_path;
  run->add_option("script", scenario_path, "Scenario file")->required();

  auto* stress = app.add_subcommand("stress", "Concurrent check-ins; verifies event_seq continuity");
  std::size_t parallel = 16, count = 100;
  std::string stress_photo;
  stress->add_option("--parallel", parallel, "Concurrent workers")->capture_default_str();
  stress->add_option("--count", count, "Total check-ins")->capture_default_str();
  stress->add_option("--photo", stress_photo, "Photo used for registration and check-ins")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*dump) {
      dump_tag(sim::load_tag_file(dump_path));
      return 0;
    }

    auto ep = parse_server(server);
    client::ApiClient api(ep.host, ep.port, admin_token);

    if (*provision) {
      sim::ProvisionOptions opts;
      opts.standard = *tag::parse_standard(standard_name);
      opts.lock = lock;
      opts.seed = seed;
      auto out = sim::provision_tag(api, gate_name, location, out_path, opts);
      std::cout << "gate " << out.registration.gate.id << " (" << out.registration.gate.name << ")\n"
                << "tag uid " << to_hex(out.tag.uid()) << ", " << out.tag.memory().size() << " of "
                << out.tag.capacity() << " bytes used\n"
                << "wrote " << out_path << '\n';
      return 0;
    }

    if (*checkin) {
      // Everything local is read before any request goes out.
      auto chip = sim::load_tag_file(tag_path);
      auto photo = sim::read_file(photo_path);
      sim::CheckinOptions opts;
      opts.client_time = now_utc();
      if (!at.empty()) {
        opts.time_override = parse_utc(at);
        if (!opts.time_override) throw std::invalid_argument("--at must be an ISO-8601 UTC time");
      }
      auto result = sim::checkin_with_tag(api, chip, device_token, std::move(photo), opts);
      std::cout << policy::describe(result.decision) << '\n';
      return result.decision.granted() ? 0 : 2;
    }

    if (*run) {
      auto script = scenario::parse_file(scenario_path);
      auto report = scenario::run(script, api);
      scenario::print_report(report, std::cout);
      report.require_all_passed();
      return 0;
    }

    if (*stress) {
      auto photo = sim::read_file(stress_photo);
      auto report = sim::run_stress(api, photo, count, parallel);
      std::cout << report.seqs.size() << " of " << report.requested << " check-ins succeeded, " << report.failures
                << " failed\n";
      if (!report.seqs.empty())
        std::cout << "event_seq " << report.seqs.front() << ".." << report.seqs.back() << '\n';
      std::cout << (report.gap_free() ? "event_seq gap-free" : "event_seq has gaps or duplicates") << '\n';
      return report.gap_free() ? 0 : 1;
    }
  } catch (const scenario::ParseError& e) {
    std::cerr << "ScenarioParseError: " << e.what() << '\n';
    return 1;
  } catch (const scenario::ExpectationFailed& e) {
    std::cerr << "ExpectationFailed: " << e.what() << '\n';
    return 1;
  } catch (const client::ApiError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const tag::Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const sim::Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
