import { describe, expect, it } from "vitest";

import { SseParser } from "../src/transport.js";

describe("SseParser", () => {
  it("extracts data payloads from complete frames", () => {
    const parser = new SseParser();
    expect(parser.feed('data: {"a":1}\n\ndata: {"b":2}\n\n')).toEqual([
      '{"a":1}',
      '{"b":2}',
    ]);
  });

  it("buffers frames split across chunks", () => {
    const parser = new SseParser();
    expect(parser.feed("data: {\"a\"")).toEqual([]);
    expect(parser.feed(":1}\n")).toEqual([]);
    expect(parser.feed("\n")).toEqual(['{"a":1}']);
  });

  it("ignores keep-alive comment frames", () => {
    const parser = new SseParser();
    expect(parser.feed(": keep-alive\n\n: keep-alive\n\ndata: x\n\n")).toEqual(["x"]);
  });
});
