// SPDX-License-Identifier: Apache-2.0
#include <random>

#include <gtest/gtest.h>

#include "gatekeeper/ndef.hpp"
#include "gatekeeper/tag.hpp"
#include "support/generators.hpp"

using namespace gatekeeper;
using namespace gatekeeper::ndef;
using gktest::random_message;
using gktest::random_payload;

namespace {

// Produced by tests/oracle/ndef_reference.py (ndeflib) for GUID 00..0f,
// gate 7 and the reference app id and link.
constexpr const char* kReferenceHex =
    "91013655046163636573732e676174656b65657065722e6578616d706c652e636f6d2f6d6f62696c652f636865636b2d696e3f73"
    "72633d6e6663140614676b3a61636c000102030405060708090a0b0c0d0e0f00000007540f18616e64726f69642e636f6d3a706b"
    "67636f6d2e676174656b65657065722e61636365737363746c";

GateTagPayload reference_payload(std::uint32_t gate = 7) {
  GateTagPayload p;
  for (std::uint8_t i = 0; i < 16; ++i) p.server_guid[i] = i;
  p.gate_id = gate;
  p.android_app_id = "com.gatekeeper.accessctl";
  p.universal_link = "https://access.gatekeeper.example.com/mobile/check-in?src=nfc";
  return p;
}

template <typename Fn>
Errc error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no ndef::Error thrown";
  return Errc::invalid_record;
}

}  // namespace

TEST(Ndef, ReferenceMessageMatchesOracle) {
  auto bytes = encode_message(build_gate_tag_message(reference_payload()));
  EXPECT_EQ(to_hex(bytes), kReferenceHex);
  EXPECT_EQ(bytes.size(), 129u);
}

TEST(Ndef, GateZeroOnlyChangesGateBytes) {
  std::string expected = kReferenceHex;
  auto pos = expected.find("00000007");
  ASSERT_NE(pos, std::string::npos);
  expected.replace(pos, 8, "00000000");
  EXPECT_EQ(to_hex(encode_message(build_gate_tag_message(reference_payload(0)))), expected);
}

TEST(Ndef, ReferenceRecordSizes) {
  auto m = build_gate_tag_message(reference_payload());
  ASSERT_EQ(m.records.size(), 3u);
  EXPECT_EQ(encoded_size(m.records[0]), 58u);
  EXPECT_EQ(encoded_size(m.records[1]), 29u);
  EXPECT_EQ(encoded_size(m.records[2]), 42u);
}

TEST(Ndef, PayloadAccountingReference) {
  auto a = payload_accounting(reference_payload());
  EXPECT_EQ(a, (PayloadAccounting{16, 4, 42, 58, 120}));
}

TEST(Ndef, AarSizeTracksAppIdLength) {
  auto p = reference_payload();
  p.android_app_id = "com.gatekeeper.accessctl2";
  EXPECT_EQ(payload_accounting(p).aar_bytes, 43u);
}

TEST(Ndef, TlvWrappedReferenceFitsNtag213) {
  auto wrapped = tag::wrap_tlv(encode_message(build_gate_tag_message(reference_payload())));
  EXPECT_EQ(wrapped.size(), 132u);
  EXPECT_LE(wrapped.size(), tag::capacity(tag::Standard::ntag213));
  EXPECT_EQ(wrapped.front(), 0x03);
  EXPECT_EQ(wrapped[1], 129);
  EXPECT_EQ(wrapped.back(), 0xFE);
}

TEST(Ndef, EmptyRecordEncoding) {
  Message m{{Record{}}};
  EXPECT_EQ(to_hex(encode_message(m)), "d00000");
  EXPECT_EQ(decode_message(*from_hex("d00000")), m);
}

TEST(Ndef, EmptyMessageRejected) { EXPECT_EQ(error_of([] { encode_message(Message{}); }), Errc::empty_message); }

TEST(Ndef, ChunkedRecordRefusedByEncoder) {
  Record r = make_external_record("a:b", {1, 2});
  r.chunked = true;
  EXPECT_EQ(error_of([&] { encode_message(Message{{r}}); }), Errc::chunked_record);
}

TEST(Ndef, InvalidRecordsRejected) {
  Record empty_with_type;
  empty_with_type.type = {'x'};
  EXPECT_EQ(error_of([&] { validate_record(empty_with_type); }), Errc::invalid_record);
  Record well_known_no_type;
  well_known_no_type.tnf = Tnf::well_known;
  EXPECT_EQ(error_of([&] { validate_record(well_known_no_type); }), Errc::invalid_record);
  Record unknown_with_type;
  unknown_with_type.tnf = Tnf::unknown;
  unknown_with_type.type = {'x'};
  EXPECT_EQ(error_of([&] { validate_record(unknown_with_type); }), Errc::invalid_record);
  Record long_type;
  long_type.tnf = Tnf::external;
  long_type.type = Bytes(256, 'a');
  EXPECT_EQ(error_of([&] { validate_record(long_type); }), Errc::invalid_record);
}

TEST(Ndef, OversizePayloadRejected) {
  EXPECT_NO_THROW(detail::check_payload_length(0xFFFFFFFFull));
  EXPECT_EQ(error_of([] { detail::check_payload_length(0x100000000ull); }), Errc::oversize_payload);
}

TEST(Ndef, DecoderFlagViolations) {
  // Second record claims message-begin.
  EXPECT_EQ(error_of([] { decode_message(*from_hex("900000d00000")); }), Errc::flag_violation);
  // First record lacks message-begin.
  EXPECT_EQ(error_of([] { decode_message(*from_hex("500000")); }), Errc::flag_violation);
  // No message-end.
  EXPECT_EQ(error_of([] { decode_message(*from_hex("900000")); }), Errc::truncated);
  // Bytes after message-end.
  EXPECT_EQ(error_of([] { decode_message(*from_hex("d0000000")); }), Errc::trailing_bytes);
  // Reserved TNF 7.
  EXPECT_EQ(error_of([] { decode_message(*from_hex("d70000")); }), Errc::invalid_record);
}

TEST(Ndef, DecoderAcceptsLongFormForSmallPayload) {
  auto m = decode_message(*from_hex("c1010000000255" "0461"));
  ASSERT_EQ(m.records.size(), 1u);
  EXPECT_EQ(uri_from_payload(m.records[0].payload), "https://a");
  // Re-encoding is canonical (short form).
  EXPECT_EQ(to_hex(encode_message(m)), "d101025504" "61");
}

TEST(Ndef, DecoderPreservesChunkFlag) {
  auto m = decode_message(*from_hex("f50001aa"));
  ASSERT_EQ(m.records.size(), 1u);
  EXPECT_TRUE(m.records[0].chunked);
}

TEST(Ndef, UriPrefixSelection) {
  EXPECT_EQ(uri_prefix_for("https://www.example.com").first, 0x02);
  EXPECT_EQ(uri_prefix_for("https://example.com").first, 0x04);
  EXPECT_EQ(uri_prefix_for("urn:nfc:x").first, 0x23);
  EXPECT_EQ(uri_prefix_for("gopher://x").first, 0x00);
  EXPECT_FALSE(uri_prefix_string(36).has_value());
  EXPECT_EQ(error_of([] { uri_from_payload(Bytes{0x24, 'a'}); }), Errc::invalid_payload);
}

TEST(Ndef, GatePayloadValidation) {
  auto p = reference_payload();
  p.android_app_id.clear();
  EXPECT_EQ(error_of([&] { validate(p); }), Errc::invalid_payload);
  p = reference_payload();
  p.android_app_id = "com.bad app";
  EXPECT_EQ(error_of([&] { validate(p); }), Errc::invalid_payload);
  p = reference_payload();
  p.universal_link = "gopher://nope";
  EXPECT_EQ(error_of([&] { validate(p); }), Errc::invalid_payload);
}

TEST(Ndef, GateParsingIsOrderInsensitive) {
  auto m = build_gate_tag_message(reference_payload());
  std::swap(m.records[0], m.records[2]);
  EXPECT_EQ(parse_gate_tag_message(m), reference_payload());
  m.records[1].type = to_bytes("GK:ACL");
  EXPECT_EQ(parse_gate_tag_message(m), reference_payload());
}

TEST(Ndef, GateParsingMissingRecord) {
  for (std::size_t drop = 0; drop < 3; ++drop) {
    auto m = build_gate_tag_message(reference_payload());
    m.records.erase(m.records.begin() + static_cast<std::ptrdiff_t>(drop));
    EXPECT_EQ(error_of([&] { parse_gate_tag_message(m); }), Errc::missing_record) << drop;
  }
}

TEST(Ndef, GateParsingBadLength) {
  auto m = build_gate_tag_message(reference_payload());
  m.records[1].payload.pop_back();
  EXPECT_EQ(error_of([&] { parse_gate_tag_message(m); }), Errc::bad_length);
}

TEST(NdefProperty, RandomMessagesRoundTripAndPrefixesFail) {
  std::mt19937_64 rng(20260302);
  for (int i = 0; i < 1000; ++i) {
    auto m = random_message(rng);
    auto bytes = encode_message(m);
    std::size_t total = 0;
    for (const auto& r : m.records) total += encoded_size(r);
    ASSERT_EQ(bytes.size(), total);
    ASSERT_EQ(decode_message(bytes), m) << "case " << i;
    for (std::size_t cut = 0; cut < bytes.size(); ++cut)
      ASSERT_THROW(decode_message(ByteView(bytes).first(cut)), Error) << "case " << i << " prefix " << cut;
  }
}

TEST(NdefProperty, RandomGatePayloadsRoundTripAndPrefixesFail) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    auto p = random_payload(rng);
    auto bytes = encode_message(build_gate_tag_message(p));
    ASSERT_EQ(parse_gate_tag_message(decode_message(bytes)), p) << "case " << i;
    auto a = payload_accounting(p);
    ASSERT_EQ(a.total_bytes, bytes.size() - encoded_size(build_gate_tag_message(p).records[1]) + 20);
    for (std::size_t cut = 0; cut < bytes.size(); ++cut)
      ASSERT_THROW(decode_message(ByteView(bytes).first(cut)), Error) << "case " << i << " prefix " << cut;
  }
}
