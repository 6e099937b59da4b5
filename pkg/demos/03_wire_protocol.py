"""The canonical JSON wire protocol.

Every message is a versioned envelope; encoding sorts keys and strips
insignificant whitespace so that identical messages are identical bytes on
any implementation. Decoding accepts any key order and whitespace but
rejects structural problems with distinct error codes.

Run from the repository root:  python demos/03_wire_protocol.py
"""

from convoforge import wire

msg = wire.user_turn("s1", 1, "bring me the gear")
data = wire.encode(msg)
print("canonical bytes:")
print(" ", data.decode())

# A sloppy peer may send the same message with shuffled keys and indentation;
# decode normalizes it and re-encoding restores the canonical bytes.
sloppy = """{
  "kind": "UserTurn",
  "body": {"text": "bring me the gear"},
  "seq": 1,
  "version": "1.0",
  "session": "s1"
}"""
assert wire.decode(sloppy) == msg
assert wire.encode(wire.decode(sloppy)) == data
print("reordered + indented input decodes to the same message: ok")

print("\nrejections carry distinct codes:")
for raw in [
    b'{"bad json',
    b'{"version":"2.0","session":"s","seq":1,"kind":"UserTurn","body":{"text":"x"}}',
    b'{"version":"1.0","session":"s","seq":1,"kind":"Telepathy","body":{}}',
]:
    try:
        wire.decode(raw)
    except wire.WireError as exc:
        print(f"  {exc.code:<18} {raw[:40]!r}")

# Sequence numbers increase strictly per session and direction.
try:
    wire.decode(wire.encode(wire.user_turn("s1", 3, "x")), last_seq=3)
except wire.WireError as exc:
    print(f"  {exc.code:<18} seq 3 after seq 3")
