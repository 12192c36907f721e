// SPDX-License-Identifier: Apache-2.0
#pragma once

// Stand-ins for the admin device and the user's phone.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gatekeeper/bytes.hpp"
#include "gatekeeper/client.hpp"
#include "gatekeeper/error.hpp"
#include "gatekeeper/ndef.hpp"
#include "gatekeeper/service.hpp"
#include "gatekeeper/tag.hpp"

namespace gatekeeper::sim {

enum class Errc {
  file_exists,
  file_missing,
  io_error,
  stress_failed,
};

std::string_view to_string(Errc code);

using Error = BasicError<Errc>;

struct ProvisionOptions {
  tag::Standard standard = tag::Standard::ntag216;
  /// Lock the tag read-only after writing. Off by default: the tag stays
  /// writable with the organization password.
  bool lock = false;
  /// Reproducible UID.
  std::optional<std::uint64_t> seed;
};

/// Programs a blank tag from a gate registration: writes the NDEF message,
/// then sets the organization tag password (and optionally locks).
tag::TagChip program_gate_tag(const service::GateRegistration& registration, const ProvisionOptions& options = {});

struct Provisioned {
  service::GateRegistration registration;
  tag::TagChip tag;
};

/// register_gate on the server, then program_gate_tag, then save the image.
/// Refuses to overwrite `out_path` (checked before contacting the server).
Provisioned provision_tag(client::ApiClient& api, const std::string& name, const std::string& location,
                          const std::filesystem::path& out_path, const ProvisionOptions& options = {});

/// Reads and parses the gate payload the way a phone would (no password).
ndef::GateTagPayload read_gate_tag(const tag::TagChip& tag);

Bytes read_file(const std::filesystem::path& path);
/// Writes atomically; with `overwrite` false an existing file is FileExists.
void write_file(const std::filesystem::path& path, ByteView bytes, bool overwrite);

tag::TagChip load_tag_file(const std::filesystem::path& path);

struct CheckinOptions {
  std::optional<Timestamp> client_time;
  std::optional<Timestamp> time_override;
};

service::CheckinResult checkin_with_tag(client::ApiClient& api, const tag::TagChip& tag,
                                        const std::string& device_token, Bytes photo,
                                        const CheckinOptions& options = {});

struct StressReport {
  std::size_t requested = 0;
  /// event_seq of every successful check-in, sorted.
  std::vector<std::uint64_t> seqs;
  std::size_t failures = 0;
  std::string first_error;

  bool gap_free() const;
};

/// Registers a throwaway gate and user, then fires `count` check-ins from
/// `parallel` threads.
StressReport run_stress(client::ApiClient& api, ByteView photo, std::size_t count, std::size_t parallel);

}  // namespace gatekeeper::sim
