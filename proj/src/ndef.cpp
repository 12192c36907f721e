// SPDX-License-Identifier: Apache-2.0
#include "gatekeeper/ndef.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <limits>

namespace gatekeeper::ndef {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::empty_message: return "EmptyMessage";
    case Errc::oversize_payload: return "OversizePayload";
    case Errc::invalid_record: return "InvalidRecord";
    case Errc::chunked_record: return "ChunkedRecord";
    case Errc::truncated: return "Truncated";
    case Errc::flag_violation: return "FlagViolation";
    case Errc::trailing_bytes: return "TrailingBytes";
    case Errc::invalid_payload: return "InvalidPayload";
    case Errc::missing_record: return "MissingRecord";
    case Errc::bad_length: return "BadLength";
  }
  return "Unknown";
}

namespace {

constexpr std::array<std::string_view, 36> kUriPrefixes = {
    "",
    "http://www.",
    "https://www.",
    "http://",
    "https://",
    "tel:",
    "mailto:",
    "ftp://anonymous:anonymous@",
    "ftp://ftp.",
    "ftps://",
    "sftp://",
    "smb://",
    "nfs://",
    "ftp://",
    "dav://",
    "news:",
    "telnet://",
    "imap:",
    "rtsp://",
    "urn:",
    "pop:",
    "sip:",
    "sips:",
    "tftp:",
    "btspp://",
    "btl2cap://",
    "btgoep://",
    "tcpobex://",
    "irdaobex://",
    "file://",
    "urn:epc:id:",
    "urn:epc:tag:",
    "urn:epc:pat:",
    "urn:epc:raw:",
    "urn:epc:",
    "urn:nfc:",
};

constexpr std::size_t kShortRecordLimit = 256;

bool iequals(ByteView a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](std::uint8_t x, char y) {
           return std::tolower(x) == std::tolower(static_cast<unsigned char>(y));
         });
}

class Reader {
 public:
  explicit Reader(ByteView data) : data_(data) {}

  bool empty() const { return pos_ == data_.size(); }

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }

  std::uint32_t u32be() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = v << 8 | data_[pos_++];
    return v;
  }

  Bytes take(std::size_t n) {
    need(n);
    Bytes out(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
              data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw Error(Errc::truncated);
  }

  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace

void detail::check_payload_length(std::uint64_t length) {
  if (length > std::numeric_limits<std::uint32_t>::max())
    throw Error(Errc::oversize_payload, std::to_string(length) + " bytes");
}

void validate_record(const Record& r) {
  auto tnf = static_cast<std::uint8_t>(r.tnf);
  if (tnf > 6) throw Error(Errc::invalid_record, "reserved TNF");
  if (r.type.size() > 255) throw Error(Errc::invalid_record, "type longer than 255 bytes");
  if (r.id && r.id->size() > 255) throw Error(Errc::invalid_record, "id longer than 255 bytes");
  switch (r.tnf) {
    case Tnf::empty:
      if (!r.type.empty() || (r.id && !r.id->empty()) || !r.payload.empty())
        throw Error(Errc::invalid_record, "empty record with content");
      break;
    case Tnf::unknown:
    case Tnf::unchanged:
      if (!r.type.empty()) throw Error(Errc::invalid_record, "type must be empty for this TNF");
      break;
    default:
      if (r.type.empty()) throw Error(Errc::invalid_record, "type required for this TNF");
      break;
  }
}

std::size_t encoded_size(const Record& r) {
  std::size_t size = 2;  // header + type length
  size += r.payload.size() < kShortRecordLimit ? 1 : 4;
  if (r.id) size += 1 + r.id->size();
  return size + r.type.size() + r.payload.size();
}

Bytes encode_message(const Message& message) {
  if (message.records.empty()) throw Error(Errc::empty_message);

  Bytes out;
  const auto count = message.records.size();
  for (std::size_t i = 0; i < count; ++i) {
    const Record& r = message.records[i];
    validate_record(r);
    if (r.chunked || r.tnf == Tnf::unchanged) throw Error(Errc::chunked_record);
    detail::check_payload_length(r.payload.size());

    const bool short_record = r.payload.size() < kShortRecordLimit;
    std::uint8_t header = static_cast<std::uint8_t>(r.tnf);
    if (i == 0) header |= kFlagMessageBegin;
    if (i + 1 == count) header |= kFlagMessageEnd;
    if (short_record) header |= kFlagShortRecord;
    if (r.id) header |= kFlagIdLength;

    out.push_back(header);
    out.push_back(static_cast<std::uint8_t>(r.type.size()));
    if (short_record) {
      out.push_back(static_cast<std::uint8_t>(r.payload.size()));
    } else {
      auto len = static_cast<std::uint32_t>(r.payload.size());
      for (int shift = 24; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(len >> shift));
    }
    if (r.id) out.push_back(static_cast<std::uint8_t>(r.id->size()));
    out.insert(out.end(), r.type.begin(), r.type.end());
    if (r.id) out.insert(out.end(), r.id->begin(), r.id->end());
    out.insert(out.end(), r.payload.begin(), r.payload.end());
  }
  return out;
}

Message decode_message(ByteView bytes) {
  Reader in(bytes);
  Message message;
  for (bool first = true;; first = false) {
    if (in.empty()) throw Error(Errc::truncated, "no record carries message-end");
    const std::uint8_t header = in.u8();
    const bool begin = header & kFlagMessageBegin;
    if (begin != first) throw Error(Errc::flag_violation, "message-begin misplaced");

    Record r;
    r.tnf = static_cast<Tnf>(header & kTnfMask);
    r.chunked = header & kFlagChunk;
    const std::size_t type_len = in.u8();
    const std::size_t payload_len = (header & kFlagShortRecord) ? in.u8() : in.u32be();
    std::size_t id_len = 0;
    if (header & kFlagIdLength) id_len = in.u8();
    r.type = in.take(type_len);
    if (header & kFlagIdLength) r.id = in.take(id_len);
    r.payload = in.take(payload_len);
    validate_record(r);
    message.records.push_back(std::move(r));

    if (header & kFlagMessageEnd) break;
  }
  if (!in.empty()) throw Error(Errc::trailing_bytes);
  return message;
}

std::pair<std::uint8_t, std::string_view> uri_prefix_for(std::string_view uri) {
  std::uint8_t best = 0;
  for (std::uint8_t code = 1; code < kUriPrefixes.size(); ++code) {
    auto prefix = kUriPrefixes[code];
    if (uri.starts_with(prefix) && prefix.size() > kUriPrefixes[best].size()) best = code;
  }
  return {best, kUriPrefixes[best]};
}

std::optional<std::string_view> uri_prefix_string(std::uint8_t code) {
  if (code >= kUriPrefixes.size()) return std::nullopt;
  return kUriPrefixes[code];
}

Record make_uri_record(std::string_view uri) {
  auto [code, prefix] = uri_prefix_for(uri);
  Record r;
  r.tnf = Tnf::well_known;
  r.type = {'U'};
  r.payload.push_back(code);
  auto rest = uri.substr(prefix.size());
  r.payload.insert(r.payload.end(), rest.begin(), rest.end());
  return r;
}

std::string uri_from_payload(ByteView payload) {
  if (payload.empty()) throw Error(Errc::invalid_payload, "empty URI record");
  auto prefix = uri_prefix_string(payload[0]);
  if (!prefix) throw Error(Errc::invalid_payload, "reserved URI identifier code");
  return std::string(*prefix) + gatekeeper::to_string(payload.subspan(1));
}

Record make_external_record(std::string_view type, Bytes payload) {
  Record r;
  r.tnf = Tnf::external;
  r.type = to_bytes(type);
  r.payload = std::move(payload);
  return r;
}

void validate(const GateTagPayload& p) {
  if (p.android_app_id.empty()) throw Error(Errc::invalid_payload, "android_app_id is empty");
  if (p.android_app_id.size() > 255)
    throw Error(Errc::invalid_payload, "android_app_id longer than 255 bytes");
  for (unsigned char c : p.android_app_id)
    if (c < 0x21 || c > 0x7e) throw Error(Errc::invalid_payload, "android_app_id is not printable ASCII");
  if (uri_prefix_for(p.universal_link).first == 0)
    throw Error(Errc::invalid_payload, "universal_link has no abbreviatable scheme");
}

Message build_gate_tag_message(const GateTagPayload& p) {
  validate(p);

  Bytes acl(p.server_guid.begin(), p.server_guid.end());
  for (int shift = 24; shift >= 0; shift -= 8)
    acl.push_back(static_cast<std::uint8_t>(p.gate_id >> shift));

  Message m;
  m.records.push_back(make_uri_record(p.universal_link));
  m.records.push_back(make_external_record(kGateRecordType, std::move(acl)));
  m.records.push_back(make_external_record(kAndroidAppRecordType, to_bytes(p.android_app_id)));
  return m;
}

GateTagPayload parse_gate_tag_message(const Message& message) {
  const Record* acl = nullptr;
  const Record* uri = nullptr;
  const Record* aar = nullptr;
  for (const auto& r : message.records) {
    if (r.tnf == Tnf::external && iequals(r.type, kGateRecordType) && !acl) acl = &r;
    else if (r.tnf == Tnf::external && iequals(r.type, kAndroidAppRecordType) && !aar) aar = &r;
    else if (r.tnf == Tnf::well_known && r.type == Bytes{'U'} && !uri) uri = &r;
  }
  if (!acl) throw Error(Errc::missing_record, kGateRecordType);
  if (acl->payload.size() != kGateRecordPayloadSize)
    throw Error(Errc::bad_length, "gk:acl payload is " + std::to_string(acl->payload.size()) + " bytes");
  if (!uri) throw Error(Errc::missing_record, "URI");
  if (!aar) throw Error(Errc::missing_record, kAndroidAppRecordType);

  GateTagPayload p;
  std::copy_n(acl->payload.begin(), p.server_guid.size(), p.server_guid.begin());
  for (std::size_t i = 16; i < kGateRecordPayloadSize; ++i) p.gate_id = p.gate_id << 8 | acl->payload[i];
  p.universal_link = uri_from_payload(uri->payload);
  p.android_app_id = gatekeeper::to_string(aar->payload);
  validate(p);
  return p;
}

PayloadAccounting payload_accounting(const GateTagPayload& p) {
  validate(p);
  PayloadAccounting a;
  a.server_id_bytes = p.server_guid.size();
  a.gate_id_bytes = sizeof(p.gate_id);
  a.aar_bytes = encoded_size(make_external_record(kAndroidAppRecordType, to_bytes(p.android_app_id)));
  a.universal_link_bytes = encoded_size(make_uri_record(p.universal_link));
  a.total_bytes = a.server_id_bytes + a.gate_id_bytes + a.aar_bytes + a.universal_link_bytes;
  return a;
}

}  // namespace gatekeeper::ndef
