import json
import random

import pytest

from convoforge import wire
from convoforge.wire import WireError, decode, encode

from genutil import random_wire_message

GOLDEN_FILES = [
    "user_turn_1.json",
    "robot_turn_respond.json",
    "robot_turn_elicit.json",
    "robot_turn_api_call.json",
    "robot_turn_end.json",
    "api_call.json",
    "api_result.json",
    "event.json",
    "session_start.json",
    "session_end.json",
    "error_no_session.json",
    "user_turn_unicode.json",
]


@pytest.mark.parametrize("name", GOLDEN_FILES)
def test_golden_byte_round_trip(fixtures_dir, name):
    raw = (fixtures_dir / "wire" / name).read_bytes()
    msg = decode(raw)
    assert encode(msg) == raw


def test_goldens_cover_every_kind(fixtures_dir):
    kinds = {
        decode((fixtures_dir / "wire" / name).read_bytes()).kind for name in GOLDEN_FILES
    }
    assert len(kinds) == 8


def test_encode_is_canonical():
    msg = wire.user_turn("s1", 1, "bring me the gear")
    data = encode(msg)
    assert data == (
        b'{"body":{"text":"bring me the gear"},"kind":"UserTurn",'
        b'"seq":1,"session":"s1","version":"1.0"}'
    )
    assert encode(msg) == data  # stable across calls


def test_decode_tolerates_reordered_keys_and_whitespace(fixtures_dir):
    for name in GOLDEN_FILES:
        raw = (fixtures_dir / "wire" / name).read_bytes()
        obj = json.loads(raw)
        shuffled = json.dumps(
            {k: obj[k] for k in reversed(sorted(obj))}, indent=3, ensure_ascii=True
        )
        assert decode(shuffled) == decode(raw)
        assert encode(decode(shuffled)) == raw


def test_malformed_json_error():
    with pytest.raises(WireError) as err:
        decode(b'{"version": ')
    assert err.value.code == wire.E_MALFORMED_JSON


def test_unknown_kind_error():
    raw = json.dumps(
        {"version": "1.0", "session": "s", "seq": 1, "kind": "Telepathy", "body": {}}
    )
    with pytest.raises(WireError) as err:
        decode(raw)
    assert err.value.code == wire.E_UNKNOWN_KIND


def test_version_mismatch_error():
    raw = json.dumps(
        {"version": "2.0", "session": "s", "seq": 1, "kind": "UserTurn", "body": {"text": "x"}}
    )
    with pytest.raises(WireError) as err:
        decode(raw)
    assert err.value.code == wire.E_VERSION_MISMATCH


def test_seq_regression_error():
    raw = encode(wire.user_turn("s", 3, "x"))
    assert decode(raw, last_seq=2).seq == 3
    with pytest.raises(WireError) as err:
        decode(raw, last_seq=3)
    assert err.value.code == wire.E_SEQ_REGRESSION
    with pytest.raises(WireError) as err:
        decode(raw, last_seq=5)
    assert err.value.code == wire.E_SEQ_REGRESSION


def test_envelope_extra_key_rejected():
    raw = json.dumps(
        {
            "version": "1.0",
            "session": "s",
            "seq": 1,
            "kind": "UserTurn",
            "body": {"text": "x"},
            "hop": 1,
        }
    )
    with pytest.raises(WireError) as err:
        decode(raw)
    assert err.value.code == wire.E_BAD_ENVELOPE


def test_bad_seq_rejected():
    for bad in (0, -1, "1", 1.5, True):
        raw = json.dumps(
            {"version": "1.0", "session": "s", "seq": bad, "kind": "UserTurn", "body": {"text": "x"}}
        )
        with pytest.raises(WireError) as err:
            decode(raw)
        assert err.value.code == wire.E_BAD_ENVELOPE


def test_bad_body_rejected():
    raw = json.dumps(
        {"version": "1.0", "session": "s", "seq": 1, "kind": "UserTurn", "body": {"txt": "x"}}
    )
    with pytest.raises(WireError) as err:
        decode(raw)
    assert err.value.code == wire.E_BAD_BODY


def test_elicit_requires_slot():
    msg = wire.WireMessage("s", 1, wire.KIND_ROBOT_TURN, {"action": "elicit", "text": "which?"})
    with pytest.raises(WireError) as err:
        encode(msg)
    assert err.value.code == wire.E_BAD_BODY


def test_error_message_contains_kind_marker():
    data = encode(wire.error("s", 1, "NO_SESSION", "no session 'x'"))
    assert b'"kind":"Error"' in data


def test_property_round_trip_generated():
    rng = random.Random(2024)
    for _ in range(300):
        msg = random_wire_message(rng)
        data = encode(msg)
        assert decode(data) == msg
        loose = json.dumps(json.loads(data), indent=2, ensure_ascii=True)
        assert decode(loose) == msg
