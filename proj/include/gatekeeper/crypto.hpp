// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

#include "gatekeeper/bytes.hpp"

namespace gatekeeper::crypto {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(ByteView data);
std::string sha256_hex(ByteView data);

/// Cryptographically secure random bytes; throws std::runtime_error if the
/// system generator fails.
Bytes random_bytes(std::size_t count);

/// Random token as lowercase hex (2 * `bytes` characters).
std::string random_token(std::size_t bytes = 32);

/// Comparison whose timing does not depend on where the inputs differ.
bool constant_time_equal(std::string_view a, std::string_view b);

}  // namespace gatekeeper::crypto
