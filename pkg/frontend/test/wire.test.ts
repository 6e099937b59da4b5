/**
 * Cross-language wire conformance: the server's golden fixtures (canonical
 * bytes frozen in the Python test suite) must survive decode -> encode here
 * byte-for-byte, proving both encoders agree on the canonical form.
 */

import { readFileSync, readdirSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { decode, encode, userTurn, WireError } from "../src/wire.js";

const GOLDEN_DIR = join(__dirname, "..", "..", "tests", "fixtures", "wire");

describe("golden conformance", () => {
  const files = readdirSync(GOLDEN_DIR).filter((name) => name.endsWith(".json"));

  it("covers all eight message kinds", () => {
    const kinds = new Set(
      files.map((name) => decode(readFileSync(join(GOLDEN_DIR, name), "utf-8")).kind),
    );
    expect(kinds.size).toBe(8);
  });

  for (const name of files) {
    it(`byte round trip: ${name}`, () => {
      const raw = readFileSync(join(GOLDEN_DIR, name), "utf-8");
      expect(encode(decode(raw))).toBe(raw);
    });
  }
});

describe("encode", () => {
  it("sorts keys at every level and strips whitespace", () => {
    const msg = userTurn("s1", 1, "bring me the gear");
    expect(encode(msg)).toBe(
      '{"body":{"text":"bring me the gear"},"kind":"UserTurn","seq":1,"session":"s1","version":"1.0"}',
    );
  });
});

describe("decode", () => {
  it("tolerates reordered keys and whitespace", () => {
    const sloppy = `{
      "kind": "UserTurn", "body": {"text": "hi"},
      "seq": 2, "version": "1.0", "session": "s"
    }`;
    const msg = decode(sloppy);
    expect(msg.kind).toBe("UserTurn");
    expect(msg.seq).toBe(2);
  });

  it("rejects version mismatches", () => {
    const raw = '{"version":"2.0","session":"s","seq":1,"kind":"UserTurn","body":{}}';
    expect(() => decode(raw)).toThrow(WireError);
    expect(() => decode(raw)).toThrow(/VERSION_MISMATCH/);
  });

  it("rejects unknown kinds and malformed JSON", () => {
    expect(() => decode("{nope")).toThrow(/MALFORMED_JSON/);
    expect(() =>
      decode('{"version":"1.0","session":"s","seq":1,"kind":"Telepathy","body":{}}'),
    ).toThrow(/UNKNOWN_KIND/);
  });
});
