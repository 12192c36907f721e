// SPDX-License-Identifier: Apache-2.0
#pragma once

// Random NDEF messages and gate payloads for property tests.

#include <iterator>
#include <random>
#include <string>

#include "gatekeeper/ndef.hpp"

namespace gktest {

using namespace gatekeeper;
using namespace gatekeeper::ndef;

inline Bytes random_bytes(std::mt19937_64& rng, std::size_t n) {
  Bytes b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng());
  return b;
}

inline Record random_record(std::mt19937_64& rng) {
  Record r;
  r.tnf = static_cast<Tnf>(rng() % 6);  // unchanged is only valid inside a chunk
  auto len = [&](std::size_t max) { return static_cast<std::size_t>(rng() % (max + 1)); };
  if (r.tnf == Tnf::empty) {
    if (rng() % 2) r.id = Bytes{};
    return r;
  }
  if (r.tnf != Tnf::unknown) r.type = random_bytes(rng, 1 + len(20));
  if (rng() % 3 == 0) r.id = random_bytes(rng, len(12));
  // Mostly short records, sometimes across the 255/256 boundary.
  r.payload = random_bytes(rng, rng() % 5 == 0 ? 250 + len(20) : len(60));
  return r;
}

inline Message random_message(std::mt19937_64& rng) {
  Message m;
  std::size_t n = 1 + rng() % 4;
  for (std::size_t i = 0; i < n; ++i) m.records.push_back(random_record(rng));
  return m;
}

inline GateTagPayload random_payload(std::mt19937_64& rng) {
  static const char* kPrefixes[] = {"https://", "http://", "https://www.", "http://www.", "ftp://ftp.", "tel:"};
  static const std::string kChars = "abcdefghijklmnopqrstuvwxyz0123456789-._~/?=&%";
  GateTagPayload p;
  for (auto& b : p.server_guid) b = static_cast<std::uint8_t>(rng());
  p.gate_id = static_cast<std::uint32_t>(rng());
  std::size_t app_len = 1 + rng() % 60;
  for (std::size_t i = 0; i < app_len; ++i) p.android_app_id.push_back(static_cast<char>(0x21 + rng() % 94));
  p.universal_link = kPrefixes[rng() % std::size(kPrefixes)];
  std::size_t link_len = rng() % 300;
  for (std::size_t i = 0; i < link_len; ++i) p.universal_link.push_back(kChars[rng() % kChars.size()]);
  return p;
}

}  // namespace gktest
