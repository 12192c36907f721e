// SPDX-License-Identifier: Apache-2.0
#include "gatekeeper/bytes.hpp"

#include <cstdio>

namespace gatekeeper {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string to_hex(ByteView bytes) {
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0x0f]);
  }
  return out;
}

std::optional<Bytes> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) return std::nullopt;
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_value(hex[i]);
    int lo = hex_value(hex[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
  }
  return out;
}

std::string hex_dump(ByteView bytes) {
  constexpr std::size_t kPerLine = 16;
  constexpr std::size_t kHexWidth = 40;  // 8 groups of "xxxx "
  std::string out;
  for (std::size_t off = 0; off < bytes.size(); off += kPerLine) {
    char offset[16];
    std::snprintf(offset, sizeof offset, "%08zx: ", off);
    std::string line = offset;
    std::string hex;
    std::string ascii;
    for (std::size_t i = 0; i < kPerLine && off + i < bytes.size(); ++i) {
      auto b = bytes[off + i];
      hex.push_back(kHexDigits[b >> 4]);
      hex.push_back(kHexDigits[b & 0x0f]);
      if (i % 2 == 1) hex.push_back(' ');
      ascii.push_back(b >= 0x20 && b < 0x7f ? static_cast<char>(b) : '.');
    }
    hex.resize(kHexWidth, ' ');
    line += hex;
    line += ' ';
    line += ascii;
    line += '\n';
    out += line;
  }
  return out;
}

}  // namespace gatekeeper
