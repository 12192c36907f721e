// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace gatekeeper {

/// UTC instant, millisecond resolution. All stored and compared times use it.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

Timestamp now_utc();

/// ISO-8601 with millisecond precision and `Z`, e.g. 2025-01-06T08:00:00.000Z.
std::string format_utc(Timestamp t);

/// Parses `YYYY-MM-DDTHH:MM:SS[.fff]Z` (a trailing `+00:00` is also
/// accepted) or a bare integer number of Unix seconds.
std::optional<Timestamp> parse_utc(std::string_view text);

}  // namespace gatekeeper
