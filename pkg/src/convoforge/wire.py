"""Bit-exact JSON wire protocol.

Every message is an envelope {version, session, seq, kind, body}. Encoding
is canonical: UTF-8, keys sorted lexicographically at every level, no
insignificant whitespace. Decoding tolerates any key order and whitespace
but rejects structural problems with distinct error codes.

String-valued maps (args, bindings, payload) keep the canonical form free
of float-formatting ambiguity; only `seq` is a number.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

VERSION = "1.0"

KIND_USER_TURN = "UserTurn"
KIND_ROBOT_TURN = "RobotTurn"
KIND_API_CALL = "ApiCall"
KIND_API_RESULT = "ApiResult"
KIND_EVENT = "Event"
KIND_SESSION_START = "SessionStart"
KIND_SESSION_END = "SessionEnd"
KIND_ERROR = "Error"

# RobotTurn body "action" values
ACTION_RESPOND = "respond"
ACTION_ELICIT = "elicit"
ACTION_API_CALL = "api_call"
ACTION_END = "end"

E_MALFORMED_JSON = "MALFORMED_JSON"
E_BAD_ENVELOPE = "BAD_ENVELOPE"
E_UNKNOWN_KIND = "UNKNOWN_KIND"
E_VERSION_MISMATCH = "VERSION_MISMATCH"
E_SEQ_REGRESSION = "SEQ_REGRESSION"
E_BAD_BODY = "BAD_BODY"


class WireError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


@dataclass(frozen=True)
class WireMessage:
    session: str
    seq: int
    kind: str
    body: dict = field(default_factory=dict)
    version: str = VERSION

    def to_obj(self) -> dict:
        return {
            "version": self.version,
            "session": self.session,
            "seq": self.seq,
            "kind": self.kind,
            "body": self.body,
        }


def _is_str_map(value) -> bool:
    return isinstance(value, dict) and all(
        isinstance(k, str) and isinstance(v, str) for k, v in value.items()
    )


def _validate_body(kind: str, body) -> None:
    if not isinstance(body, dict):
        raise WireError(E_BAD_BODY, "body must be an object")

    def need(keys: set[str], optional: set[str] = frozenset()) -> None:
        extra = set(body) - keys - optional
        missing = keys - set(body)
        if extra:
            raise WireError(E_BAD_BODY, f"{kind}: unknown body keys {sorted(extra)}")
        if missing:
            raise WireError(E_BAD_BODY, f"{kind}: missing body keys {sorted(missing)}")

    def need_str(key: str) -> None:
        if not isinstance(body.get(key), str):
            raise WireError(E_BAD_BODY, f"{kind}: '{key}' must be a string")

    def need_map(key: str) -> None:
        if not _is_str_map(body.get(key)):
            raise WireError(E_BAD_BODY, f"{kind}: '{key}' must be a string map")

    if kind == KIND_USER_TURN:
        need({"text"})
        need_str("text")
    elif kind == KIND_ROBOT_TURN:
        need({"action", "text"}, optional={"slot", "api", "args"})
        need_str("action")
        need_str("text")
        if body["action"] not in (ACTION_RESPOND, ACTION_ELICIT, ACTION_API_CALL, ACTION_END):
            raise WireError(E_BAD_BODY, f"{kind}: unknown action '{body['action']}'")
        if body["action"] == ACTION_ELICIT:
            if "slot" not in body:
                raise WireError(E_BAD_BODY, f"{kind}: elicit requires 'slot'")
            need_str("slot")
        if body["action"] == ACTION_API_CALL:
            if "api" not in body or "args" not in body:
                raise WireError(E_BAD_BODY, f"{kind}: api_call requires 'api' and 'args'")
            need_str("api")
            need_map("args")
    elif kind == KIND_API_CALL:
        need({"api", "args"})
        need_str("api")
        need_map("args")
    elif kind == KIND_API_RESULT:
        need({"status", "payload"})
        need_str("status")
        need_map("payload")
    elif kind == KIND_EVENT:
        need({"dialogue", "bindings"})
        need_str("dialogue")
        need_map("bindings")
    elif kind == KIND_SESSION_START:
        need({"schema_name", "mode"})
        need_str("schema_name")
        need_str("mode")
    elif kind == KIND_SESSION_END:
        need({"reason"})
        need_str("reason")
    elif kind == KIND_ERROR:
        need({"code", "message"})
        need_str("code")
        need_str("message")
    else:  # caller checks the kind before body validation; keep a guard
        raise WireError(E_UNKNOWN_KIND, f"unknown kind '{kind}'")


_KNOWN_KINDS = {
    KIND_USER_TURN,
    KIND_ROBOT_TURN,
    KIND_API_CALL,
    KIND_API_RESULT,
    KIND_EVENT,
    KIND_SESSION_START,
    KIND_SESSION_END,
    KIND_ERROR,
}


def encode(msg: WireMessage) -> bytes:
    """Canonical bytes: sorted keys, no insignificant whitespace, UTF-8."""
    _validate_body(msg.kind, msg.body)
    if msg.kind not in _KNOWN_KINDS:
        raise WireError(E_UNKNOWN_KIND, f"unknown kind '{msg.kind}'")
    return json.dumps(
        msg.to_obj(), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def decode(data: bytes | str, last_seq: int | None = None) -> WireMessage:
    """Parse a wire message; tolerant of key order and whitespace.

    `last_seq` is the highest sequence number already seen for this session
    and direction; a message whose seq does not exceed it is rejected with
    SEQ_REGRESSION.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise WireError(E_MALFORMED_JSON, f"invalid UTF-8: {exc}") from exc
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise WireError(E_MALFORMED_JSON, f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise WireError(E_BAD_ENVELOPE, "envelope must be an object")
    expected = {"version", "session", "seq", "kind", "body"}
    if set(obj) != expected:
        raise WireError(
            E_BAD_ENVELOPE,
            f"envelope keys must be exactly {sorted(expected)}, got {sorted(obj)}",
        )
    if not isinstance(obj["version"], str):
        raise WireError(E_BAD_ENVELOPE, "version must be a string")
    if obj["version"] != VERSION:
        raise WireError(
            E_VERSION_MISMATCH, f"expected version '{VERSION}', got '{obj['version']}'"
        )
    if not isinstance(obj["session"], str):
        raise WireError(E_BAD_ENVELOPE, "session must be a string")
    seq = obj["seq"]
    if not isinstance(seq, int) or isinstance(seq, bool) or seq < 1:
        raise WireError(E_BAD_ENVELOPE, "seq must be a positive integer")
    kind = obj["kind"]
    if not isinstance(kind, str) or kind not in _KNOWN_KINDS:
        raise WireError(E_UNKNOWN_KIND, f"unknown kind '{kind}'")
    if last_seq is not None and seq <= last_seq:
        raise WireError(
            E_SEQ_REGRESSION, f"seq {seq} does not exceed last seen {last_seq}"
        )
    _validate_body(kind, obj["body"])
    return WireMessage(
        session=obj["session"], seq=seq, kind=kind, body=obj["body"], version=obj["version"]
    )


def user_turn(session: str, seq: int, text: str) -> WireMessage:
    return WireMessage(session, seq, KIND_USER_TURN, {"text": text})


def session_start(session: str, seq: int, schema_name: str, mode: str) -> WireMessage:
    return WireMessage(session, seq, KIND_SESSION_START, {"schema_name": schema_name, "mode": mode})


def session_end(session: str, seq: int, reason: str) -> WireMessage:
    return WireMessage(session, seq, KIND_SESSION_END, {"reason": reason})


def error(session: str, seq: int, code: str, message: str) -> WireMessage:
    return WireMessage(session, seq, KIND_ERROR, {"code": code, "message": message})
