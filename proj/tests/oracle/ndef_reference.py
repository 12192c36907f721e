#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
# Independent oracle for the frozen NDEF byte strings in tests/unit/ndef_test.cpp.
# Uses ndeflib (pip install ndeflib), not the C++ codec under test.
import ndef

LINK = "https://access.gatekeeper.example.com/mobile/check-in?src=nfc"
APP_ID = b"com.gatekeeper.accessctl"
GUID = bytes(range(16))


def gate_records(gate_id):
    return [
        ndef.UriRecord(LINK),
        ndef.Record("urn:nfc:ext:gk:acl", "", GUID + gate_id.to_bytes(4, "big")),
        ndef.Record("urn:nfc:ext:android.com:pkg", "", APP_ID),
    ]


def encode(records):
    return b"".join(ndef.message_encoder(records))


if __name__ == "__main__":
    print("empty record:", encode([ndef.Record()]).hex())
    for r in gate_records(7):
        print(type(r).__name__, len(encode([r])))
    msg = encode(gate_records(7))
    print("reference message", len(msg), msg.hex())
    print("gate 0 message", encode(gate_records(0)).hex())
    print("tlv-wrapped size", 1 + 1 + len(msg) + 1)
