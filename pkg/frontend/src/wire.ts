/**
 * Wire protocol envelopes and canonical JSON encoding.
 *
 * Canonical form: UTF-8, object keys sorted lexicographically at every
 * level, no insignificant whitespace. The byte output must be identical to
 * the server's encoder; the test suite checks it against the server's own
 * golden fixture files.
 */

export const VERSION = "1.0";

export type Kind =
  | "UserTurn"
  | "RobotTurn"
  | "ApiCall"
  | "ApiResult"
  | "Event"
  | "SessionStart"
  | "SessionEnd"
  | "Error";

export type RobotAction = "respond" | "elicit" | "api_call" | "end";

export interface WireMessage {
  version: string;
  session: string;
  seq: number;
  kind: Kind;
  body: Record<string, unknown>;
}

export interface RobotTurnBody {
  action: RobotAction;
  text: string;
  slot?: string;
  api?: string;
  args?: Record<string, string>;
}

const KNOWN_KINDS: ReadonlySet<string> = new Set([
  "UserTurn",
  "RobotTurn",
  "ApiCall",
  "ApiResult",
  "Event",
  "SessionStart",
  "SessionEnd",
  "Error",
]);

export class WireError extends Error {
  constructor(readonly code: string, message: string) {
    super(`${code}: ${message}`);
  }
}

function sortDeep(value: unknown): unknown {
  if (Array.isArray(value)) {
    return value.map(sortDeep);
  }
  if (value !== null && typeof value === "object") {
    const source = value as Record<string, unknown>;
    const sorted: Record<string, unknown> = {};
    for (const key of Object.keys(source).sort()) {
      sorted[key] = sortDeep(source[key]);
    }
    return sorted;
  }
  return value;
}

/** Canonical bytes of a wire message (as a string; UTF-8 on the wire). */
export function encode(msg: WireMessage): string {
  return JSON.stringify(sortDeep({ ...msg }));
}

/** Parse a wire message; tolerant of key order and whitespace. */
export function decode(data: string): WireMessage {
  let obj: unknown;
  try {
    obj = JSON.parse(data);
  } catch (err) {
    throw new WireError("MALFORMED_JSON", String(err));
  }
  if (obj === null || typeof obj !== "object" || Array.isArray(obj)) {
    throw new WireError("BAD_ENVELOPE", "envelope must be an object");
  }
  const env = obj as Record<string, unknown>;
  const keys = Object.keys(env).sort().join(",");
  if (keys !== "body,kind,seq,session,version") {
    throw new WireError("BAD_ENVELOPE", `unexpected envelope keys: ${keys}`);
  }
  if (env.version !== VERSION) {
    throw new WireError("VERSION_MISMATCH", `expected ${VERSION}, got ${env.version}`);
  }
  if (typeof env.session !== "string") {
    throw new WireError("BAD_ENVELOPE", "session must be a string");
  }
  if (typeof env.seq !== "number" || !Number.isInteger(env.seq) || env.seq < 1) {
    throw new WireError("BAD_ENVELOPE", "seq must be a positive integer");
  }
  if (typeof env.kind !== "string" || !KNOWN_KINDS.has(env.kind)) {
    throw new WireError("UNKNOWN_KIND", `unknown kind '${env.kind}'`);
  }
  if (env.body === null || typeof env.body !== "object" || Array.isArray(env.body)) {
    throw new WireError("BAD_BODY", "body must be an object");
  }
  return {
    version: env.version,
    session: env.session,
    seq: env.seq,
    kind: env.kind as Kind,
    body: env.body as Record<string, unknown>,
  };
}

export function userTurn(session: string, seq: number, text: string): WireMessage {
  return { version: VERSION, session, seq, kind: "UserTurn", body: { text } };
}

export function sessionStart(
  session: string,
  seq: number,
  schemaName: string,
  mode: string,
): WireMessage {
  return {
    version: VERSION,
    session,
    seq,
    kind: "SessionStart",
    body: { schema_name: schemaName, mode },
  };
}
