// SPDX-License-Identifier: Apache-2.0
#include "gatekeeper/time.hpp"

#include <charconv>
#include <cstdio>

namespace gatekeeper {

using namespace std::chrono;

Timestamp now_utc() { return time_point_cast<milliseconds>(system_clock::now()); }

std::string format_utc(Timestamp t) {
  auto day = floor<days>(t);
  year_month_day ymd{day};
  hh_mm_ss hms{t - day};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ld.%03ldZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<long>(hms.hours().count()),
                static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()),
                static_cast<long>(hms.subseconds().count()));
  return buf;
}

namespace {

bool read_int(std::string_view& s, std::size_t digits, int& out) {
  if (s.size() < digits) return false;
  for (std::size_t i = 0; i < digits; ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  std::from_chars(s.data(), s.data() + digits, out);
  s.remove_prefix(digits);
  return true;
}

bool expect(std::string_view& s, char c) {
  if (s.empty() || s.front() != c) return false;
  s.remove_prefix(1);
  return true;
}

}  // namespace

std::optional<Timestamp> parse_utc(std::string_view text) {
  if (text.empty()) return std::nullopt;

  bool all_digits = true;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (!(c >= '0' && c <= '9') && !(i == 0 && c == '-' && text.size() > 1)) all_digits = false;
  }
  if (all_digits) {
    long long secs = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), secs);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return Timestamp{seconds{secs}};
  }

  std::string_view s = text;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0, ms = 0;
  if (!read_int(s, 4, y) || !expect(s, '-') || !read_int(s, 2, mo) || !expect(s, '-') ||
      !read_int(s, 2, d) || !expect(s, 'T') || !read_int(s, 2, h) || !expect(s, ':') ||
      !read_int(s, 2, mi) || !expect(s, ':') || !read_int(s, 2, sec))
    return std::nullopt;
  if (!s.empty() && s.front() == '.') {
    s.remove_prefix(1);
    std::size_t n = 0;
    int frac = 0;
    while (n < s.size() && s[n] >= '0' && s[n] <= '9') {
      if (n < 3) frac = frac * 10 + (s[n] - '0');
      ++n;
    }
    if (n == 0) return std::nullopt;
    for (std::size_t k = n; k < 3; ++k) frac *= 10;
    ms = frac;
    s.remove_prefix(n);
  }
  if (s != "Z" && s != "+00:00") return std::nullopt;

  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 59) return std::nullopt;
  return Timestamp{sys_days{ymd}} + hours{h} + minutes{mi} + seconds{sec} + milliseconds{ms};
}

}  // namespace gatekeeper
