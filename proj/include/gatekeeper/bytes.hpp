// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gatekeeper {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

inline std::string to_string(ByteView b) { return std::string(b.begin(), b.end()); }

/// Lowercase hex, no separators.
std::string to_hex(ByteView bytes);

/// Accepts upper- or lowercase hex; nullopt on odd length or bad digit.
std::optional<Bytes> from_hex(std::string_view hex);

/// `xxd`-compatible dump: 16 bytes per line, "OOOOOOOO: " offset, eight
/// two-byte groups, then the printable-ASCII column.
std::string hex_dump(ByteView bytes);

}  // namespace gatekeeper
