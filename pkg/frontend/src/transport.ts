/**
 * HTTP transport to the gateway, plus a fetch-stream SSE reader.
 *
 * The SSE reader uses fetch streaming rather than EventSource so the same
 * code path runs in the browser and under node-based tests.
 */

import { WireMessage, WireError, decode, encode } from "./wire.js";

export interface Transport {
  createSession(msg: WireMessage): Promise<string>;
  sendTurn(sessionId: string, msg: WireMessage): Promise<WireMessage[]>;
  /** Push-channel subscription; returns a close function. */
  openEvents(
    sessionId: string,
    onTurn: (msg: WireMessage) => void,
    onClose?: (reason: string) => void,
  ): () => void;
  endSession(sessionId: string): Promise<WireMessage>;
}

/** Incremental SSE frame parser: feed chunks, get `data:` payloads. */
export class SseParser {
  private buffer = "";

  feed(chunk: string): string[] {
    this.buffer += chunk;
    const payloads: string[] = [];
    let index: number;
    while ((index = this.buffer.indexOf("\n\n")) >= 0) {
      const frame = this.buffer.slice(0, index);
      this.buffer = this.buffer.slice(index + 2);
      const data = frame
        .split("\n")
        .filter((line) => line.startsWith("data: "))
        .map((line) => line.slice("data: ".length))
        .join("\n");
      if (data) {
        payloads.push(data); // comment-only frames (keep-alives) are dropped
      }
    }
    return payloads;
  }
}

async function throwWireError(response: Response): Promise<never> {
  const raw = await response.text();
  try {
    const msg = decode(raw);
    const body = msg.body as { code?: string; message?: string };
    throw new WireError(body.code ?? "HTTP", body.message ?? raw);
  } catch (err) {
    if (err instanceof WireError) throw err;
    throw new WireError("HTTP", `${response.status}: ${raw}`);
  }
}

export class HttpTransport implements Transport {
  constructor(private readonly baseUrl: string) {}

  async createSession(msg: WireMessage): Promise<string> {
    const response = await fetch(`${this.baseUrl}/session`, {
      method: "POST",
      body: encode(msg),
    });
    if (response.status !== 201) await throwWireError(response);
    const payload = (await response.json()) as { session: string };
    return payload.session;
  }

  async sendTurn(sessionId: string, msg: WireMessage): Promise<WireMessage[]> {
    const response = await fetch(`${this.baseUrl}/session/${sessionId}/turn`, {
      method: "POST",
      body: encode(msg),
    });
    if (!response.ok) await throwWireError(response);
    const items = (await response.json()) as unknown[];
    return items.map((item) => decode(JSON.stringify(item)));
  }

  openEvents(
    sessionId: string,
    onTurn: (msg: WireMessage) => void,
    onClose?: (reason: string) => void,
  ): () => void {
    const controller = new AbortController();
    const parser = new SseParser();
    (async () => {
      try {
        const response = await fetch(`${this.baseUrl}/session/${sessionId}/events`, {
          signal: controller.signal,
        });
        if (!response.ok || response.body === null) {
          onClose?.(`events stream failed: ${response.status}`);
          return;
        }
        const reader = response.body.getReader();
        const decoder = new TextDecoder();
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          for (const payload of parser.feed(decoder.decode(value, { stream: true }))) {
            onTurn(decode(payload));
          }
        }
        onClose?.("stream ended");
      } catch (err) {
        if (!controller.signal.aborted) onClose?.(String(err));
      }
    })();
    return () => controller.abort();
  }

  async endSession(sessionId: string): Promise<WireMessage> {
    const response = await fetch(`${this.baseUrl}/session/${sessionId}`, {
      method: "DELETE",
    });
    if (!response.ok) await throwWireError(response);
    return decode(await response.text());
  }
}
