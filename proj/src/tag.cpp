// SPDX-License-Identifier: Apache-2.0
#include "gatekeeper/tag.hpp"

#include <algorithm>
#include <cctype>
#include <random>

#include "gatekeeper/ndef.hpp"

namespace gatekeeper::tag {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::read_only: return "ReadOnly";
    case Errc::auth_failed: return "AuthFailed";
    case Errc::capacity_exceeded: return "CapacityExceeded";
    case Errc::invalid_message: return "InvalidMessage";
    case Errc::no_message: return "NoMessage";
    case Errc::bad_magic: return "BadMagic";
    case Errc::corrupt_image: return "CorruptImage";
  }
  return "Unknown";
}

std::string_view to_string(Standard s) { return s == Standard::ntag213 ? "NTAG213" : "NTAG216"; }

std::optional<Standard> parse_standard(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  if (upper == "NTAG213") return Standard::ntag213;
  if (upper == "NTAG216") return Standard::ntag216;
  return std::nullopt;
}

namespace {

constexpr std::string_view kMagic = "GKTAG1";
constexpr std::uint8_t kImageReadOnly = 0x01;
constexpr std::uint8_t kImagePassword = 0x02;
constexpr std::uint8_t kNxpManufacturer = 0x04;

}  // namespace

Bytes wrap_tlv(ByteView message) {
  Bytes out;
  out.reserve(message.size() + 5);
  out.push_back(kTlvNdef);
  if (message.size() < 0xFF) {
    out.push_back(static_cast<std::uint8_t>(message.size()));
  } else {
    out.push_back(0xFF);
    out.push_back(static_cast<std::uint8_t>(message.size() >> 8));
    out.push_back(static_cast<std::uint8_t>(message.size()));
  }
  out.insert(out.end(), message.begin(), message.end());
  out.push_back(kTlvTerminator);
  return out;
}

TagChip TagChip::create(Standard standard, std::optional<std::uint64_t> seed) {
  std::mt19937_64 rng(seed ? *seed : (std::uint64_t{std::random_device{}()} << 32 | std::random_device{}()));
  Uid uid{};
  uid[0] = kNxpManufacturer;
  std::uniform_int_distribution<int> byte(0, 255);
  for (std::size_t i = 1; i < uid.size(); ++i) uid[i] = static_cast<std::uint8_t>(byte(rng));
  return TagChip(standard, uid);
}

void TagChip::require_auth(const std::optional<Password>& supplied) const {
  if (password_ && (!supplied || *supplied != *password_)) throw Error(Errc::auth_failed);
}

void TagChip::write_ndef(ByteView message, const std::optional<Password>& password) {
  if (read_only_) throw Error(Errc::read_only);
  require_auth(password);
  try {
    ndef::decode_message(message);
  } catch (const ndef::Error& e) {
    throw Error(Errc::invalid_message, e.what());
  }
  if (message.size() > 0xFFFF) throw Error(Errc::capacity_exceeded);
  Bytes wrapped = wrap_tlv(message);
  if (wrapped.size() > capacity())
    throw Error(Errc::capacity_exceeded,
                std::to_string(wrapped.size()) + " > " + std::to_string(capacity()) + " bytes");
  memory_ = std::move(wrapped);
}

Bytes TagChip::read_ndef() const {
  std::size_t pos = 0;
  const auto size = memory_.size();
  while (pos < size) {
    const std::uint8_t type = memory_[pos++];
    if (type == kTlvNull) continue;
    if (type == kTlvTerminator || pos >= size) break;

    std::size_t len = memory_[pos++];
    if (len == 0xFF) {
      if (size - pos < 2) break;
      len = std::size_t{memory_[pos]} << 8 | memory_[pos + 1];
      pos += 2;
    }
    if (size - pos < len) break;
    if (type == kTlvNdef) {
      if (len == 0) break;
      return Bytes(memory_.begin() + static_cast<std::ptrdiff_t>(pos),
                   memory_.begin() + static_cast<std::ptrdiff_t>(pos + len));
    }
    pos += len;
  }
  throw Error(Errc::no_message);
}

void TagChip::set_password(const Password& new_password, const std::optional<Password>& old_password) {
  if (read_only_) throw Error(Errc::read_only);
  require_auth(old_password);
  password_ = new_password;
}

void TagChip::lock_readonly(const std::optional<Password>& password) {
  if (read_only_) return;
  require_auth(password);
  read_only_ = true;
}

Bytes save_tag_image(const TagChip& tag) {
  Bytes out(kMagic.begin(), kMagic.end());
  out.push_back(static_cast<std::uint8_t>(tag.standard()));
  out.insert(out.end(), tag.uid().begin(), tag.uid().end());
  std::uint8_t flags = 0;
  if (tag.read_only()) flags |= kImageReadOnly;
  if (tag.password()) flags |= kImagePassword;
  out.push_back(flags);
  if (tag.password()) out.insert(out.end(), tag.password()->begin(), tag.password()->end());
  const auto len = tag.memory().size();
  out.push_back(static_cast<std::uint8_t>(len >> 8));
  out.push_back(static_cast<std::uint8_t>(len));
  out.insert(out.end(), tag.memory().begin(), tag.memory().end());
  return out;
}

TagChip load_tag_image(ByteView image) {
  const std::size_t magic_len = std::min(image.size(), kMagic.size());
  if (!std::equal(image.begin(), image.begin() + static_cast<std::ptrdiff_t>(magic_len), kMagic.begin()))
    throw Error(Errc::bad_magic);

  std::size_t pos = kMagic.size();
  auto need = [&](std::size_t n) {
    if (image.size() < pos || image.size() - pos < n) throw Error(Errc::corrupt_image, "truncated image");
  };

  need(1 + 7 + 1);
  const std::uint8_t code = image[pos++];
  if (code != static_cast<std::uint8_t>(Standard::ntag213) && code != static_cast<std::uint8_t>(Standard::ntag216))
    throw Error(Errc::corrupt_image, "unknown tag standard");
  Uid uid{};
  std::copy_n(image.begin() + static_cast<std::ptrdiff_t>(pos), uid.size(), uid.begin());
  pos += uid.size();
  const std::uint8_t flags = image[pos++];
  if (flags & ~(kImageReadOnly | kImagePassword)) throw Error(Errc::corrupt_image, "unknown flag bits");

  TagChip tag(static_cast<Standard>(code), uid);
  tag.read_only_ = flags & kImageReadOnly;
  if (flags & kImagePassword) {
    need(4);
    Password pw{};
    std::copy_n(image.begin() + static_cast<std::ptrdiff_t>(pos), pw.size(), pw.begin());
    pos += pw.size();
    tag.password_ = pw;
  }
  need(2);
  const std::size_t len = std::size_t{image[pos]} << 8 | image[pos + 1];
  pos += 2;
  if (len > tag.capacity()) throw Error(Errc::corrupt_image, "memory exceeds tag capacity");
  need(len);
  tag.memory_.assign(image.begin() + static_cast<std::ptrdiff_t>(pos),
                     image.begin() + static_cast<std::ptrdiff_t>(pos + len));
  pos += len;
  if (pos != image.size()) throw Error(Errc::corrupt_image, "trailing bytes");
  return tag;
}

}  // namespace gatekeeper::tag
