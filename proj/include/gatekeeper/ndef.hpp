// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gatekeeper/bytes.hpp"
#include "gatekeeper/error.hpp"

namespace gatekeeper::ndef {

enum class Errc {
  empty_message,
  oversize_payload,
  invalid_record,
  chunked_record,
  truncated,
  flag_violation,
  trailing_bytes,
  invalid_payload,
  missing_record,
  bad_length,
};

std::string_view to_string(Errc code);

using Error = BasicError<Errc>;

/// Type Name Format, the 3-bit field in every record header.
enum class Tnf : std::uint8_t {
  empty = 0,
  well_known = 1,
  mime_media = 2,
  absolute_uri = 3,
  external = 4,
  unknown = 5,
  unchanged = 6,
};

struct Record {
  Tnf tnf = Tnf::empty;
  Bytes type;
  std::optional<Bytes> id;
  Bytes payload;
  /// CF flag. Preserved by the decoder; the encoder refuses chunked records.
  bool chunked = false;

  friend bool operator==(const Record&, const Record&) = default;
};

struct Message {
  std::vector<Record> records;

  friend bool operator==(const Message&, const Message&) = default;
};

// Record header flag bits.
inline constexpr std::uint8_t kFlagMessageBegin = 0x80;
inline constexpr std::uint8_t kFlagMessageEnd = 0x40;
inline constexpr std::uint8_t kFlagChunk = 0x20;
inline constexpr std::uint8_t kFlagShortRecord = 0x10;
inline constexpr std::uint8_t kFlagIdLength = 0x08;
inline constexpr std::uint8_t kTnfMask = 0x07;

/// Throws Error(invalid_record) if the record breaks a structural invariant
/// (empty TNF with content, type/id longer than 255 bytes, and so on).
void validate_record(const Record& record);

/// Size in bytes of the canonical encoding of one record.
std::size_t encoded_size(const Record& record);

/// Canonical encoding: short-record form whenever the payload is below 256
/// bytes, MB on the first record and ME on the last.
Bytes encode_message(const Message& message);

/// Strict decoder. Accepts the long payload-length form for small payloads.
Message decode_message(ByteView bytes);

namespace detail {
// Exposed for tests: payload lengths must fit the 32-bit length field.
void check_payload_length(std::uint64_t length);
}  // namespace detail

// --- URI record helpers -----------------------------------------------------

/// Longest entry of the standard URI identifier-code table that prefixes
/// `uri`, as (code, prefix). Code 0 with an empty prefix when nothing matches.
std::pair<std::uint8_t, std::string_view> uri_prefix_for(std::string_view uri);

/// Prefix string for an identifier code; nullopt for reserved codes.
std::optional<std::string_view> uri_prefix_string(std::uint8_t code);

Record make_uri_record(std::string_view uri);

/// Expands a well-known "U" record payload back into the full URI.
std::string uri_from_payload(ByteView payload);

Record make_external_record(std::string_view type, Bytes payload);

// --- Gate tag layout ---------------------------------------------------------

inline constexpr std::string_view kGateRecordType = "gk:acl";
inline constexpr std::string_view kAndroidAppRecordType = "android.com:pkg";
inline constexpr std::size_t kGateRecordPayloadSize = 20;

using Guid = std::array<std::uint8_t, 16>;

/// The logical content programmed onto every gate tag.
struct GateTagPayload {
  Guid server_guid{};
  std::uint32_t gate_id = 0;
  std::string android_app_id;
  std::string universal_link;

  friend bool operator==(const GateTagPayload&, const GateTagPayload&) = default;
};

/// Throws Error(invalid_payload) describing the first broken field.
void validate(const GateTagPayload& payload);

/// Three records, in order: URI (universal link), `gk:acl` external record
/// (GUID followed by the big-endian gate id), Android Application Record.
Message build_gate_tag_message(const GateTagPayload& payload);

/// Matches records by type, so record order does not matter.
GateTagPayload parse_gate_tag_message(const Message& message);

/// Byte budget in the form the tag sizing table uses: GUID and gate id are
/// counted raw, the two launch records are counted with their headers.
struct PayloadAccounting {
  std::size_t server_id_bytes = 0;
  std::size_t gate_id_bytes = 0;
  std::size_t aar_bytes = 0;
  std::size_t universal_link_bytes = 0;
  std::size_t total_bytes = 0;

  friend bool operator==(const PayloadAccounting&, const PayloadAccounting&) = default;
};

PayloadAccounting payload_accounting(const GateTagPayload& payload);

}  // namespace gatekeeper::ndef
