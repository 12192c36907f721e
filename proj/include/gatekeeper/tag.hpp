// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "gatekeeper/bytes.hpp"
#include "gatekeeper/error.hpp"

namespace gatekeeper::tag {

enum class Errc {
  read_only,
  auth_failed,
  capacity_exceeded,
  invalid_message,
  no_message,
  bad_magic,
  corrupt_image,
};

std::string_view to_string(Errc code);

using Error = BasicError<Errc>;

enum class Standard : std::uint8_t { ntag213 = 1, ntag216 = 2 };

/// Usable NDEF area in bytes: 144 for NTAG213, 888 for NTAG216.
constexpr std::size_t capacity(Standard s) { return s == Standard::ntag213 ? 144 : 888; }

std::string_view to_string(Standard s);
std::optional<Standard> parse_standard(std::string_view name);

using Uid = std::array<std::uint8_t, 7>;
using Password = std::array<std::uint8_t, 4>;

// TLV framing inside tag memory.
inline constexpr std::uint8_t kTlvNull = 0x00;
inline constexpr std::uint8_t kTlvNdef = 0x03;
inline constexpr std::uint8_t kTlvTerminator = 0xFE;

/// Memory image for an NDEF message: 0x03, length (one byte below 0xFF,
/// otherwise 0xFF + 16-bit big-endian), message, 0xFE.
Bytes wrap_tlv(ByteView message);

/// Simulated NTAG chip. Mutators either succeed completely or throw and
/// leave the tag untouched.
class TagChip {
 public:
  /// Fresh blank tag. A seed makes the UID reproducible; without one the UID
  /// comes from the system entropy source.
  static TagChip create(Standard standard, std::optional<std::uint64_t> seed = std::nullopt);

  /// Replaces memory with the TLV-wrapped message. `message` must decode as
  /// an NDEF message.
  void write_ndef(ByteView message, const std::optional<Password>& password = std::nullopt);

  /// Inner NDEF message bytes. Never needs the password.
  Bytes read_ndef() const;

  void set_password(const Password& new_password,
                    const std::optional<Password>& old_password = std::nullopt);

  /// Irreversible. Locking an already locked tag is a no-op.
  void lock_readonly(const std::optional<Password>& password = std::nullopt);

  const Uid& uid() const { return uid_; }
  Standard standard() const { return standard_; }
  std::size_t capacity() const { return tag::capacity(standard_); }
  const Bytes& memory() const { return memory_; }
  const std::optional<Password>& password() const { return password_; }
  bool read_only() const { return read_only_; }

  friend bool operator==(const TagChip&, const TagChip&) = default;

 private:
  friend TagChip load_tag_image(ByteView image);

  TagChip(Standard standard, const Uid& uid) : uid_(uid), standard_(standard) {}

  void require_auth(const std::optional<Password>& supplied) const;

  Uid uid_{};
  Standard standard_;
  Bytes memory_;
  std::optional<Password> password_;
  bool read_only_ = false;
};

/// Self-describing binary image (`GKTAG1` format, see docs/formats.md).
Bytes save_tag_image(const TagChip& tag);
TagChip load_tag_image(ByteView image);

}  // namespace gatekeeper::tag
