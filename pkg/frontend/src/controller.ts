/**
 * Operator console controller: all behaviour, no DOM.
 *
 * The transcript mirrors the wire messages 1:1 and in gateway order: robot
 * turns are ordered by their server sequence number (the turn channel and
 * the event channel share one counter), and each user turn is re-anchored
 * directly before its first reply once the reply arrives. The console never
 * invents or rewrites robot text; every rendered line is a wire message.
 */

import { Transport } from "./transport.js";
import {
  RobotTurnBody,
  WireMessage,
  sessionStart,
  userTurn,
} from "./wire.js";

export type Connection = "disconnected" | "connecting" | "live" | "ended";

export interface TranscriptEntry {
  speaker: "user" | "robot" | "system";
  text: string;
  seq: number;
  channel: "turn" | "event" | "lifecycle";
  message: WireMessage;
  /** For user entries: the server seq of their first reply, set when the
   * reply arrives. Orders the entry against late event-channel turns. */
  anchorSeq?: number;
}

export interface PendingElicit {
  slot: string;
  prompt: string;
  chips: string[];
}

export interface ConsoleState {
  sessionId: string | null;
  mode: string;
  connection: Connection;
  transcript: TranscriptEntry[];
  pendingElicit: PendingElicit | null;
  toasts: string[];
  requestedItems: string[]; // observed fetch api_call arguments, in order
  reportedSteps: number[]; // observed report_done api_call arguments
  lastError: string | null;
}

/** slot name -> catalog values, for elicitation quick-reply chips. */
export type ChipTable = Map<string, string[]>;

export interface SchemaDoc {
  name: string;
  catalogs: { name: string; entries: { value: string }[] }[];
  dialogues: { slots: { name: string; kind: string }[] }[];
}

/** Build the chip lookup from a schema document. Slots sharing a name pool
 * their catalogs (the wire names the slot, not the dialogue). */
export function chipTableFromSchema(schema: SchemaDoc): ChipTable {
  const byCatalog = new Map<string, string[]>(
    schema.catalogs.map((c) => [c.name, c.entries.map((e) => e.value)]),
  );
  const table: ChipTable = new Map();
  for (const dialogue of schema.dialogues) {
    for (const slot of dialogue.slots) {
      if (!slot.kind.startsWith("catalog:")) continue;
      const values = byCatalog.get(slot.kind.slice("catalog:".length)) ?? [];
      const existing = table.get(slot.name) ?? [];
      for (const value of values) {
        if (!existing.includes(value)) existing.push(value);
      }
      table.set(slot.name, existing);
    }
  }
  return table;
}

export class ConsoleController {
  readonly state: ConsoleState = {
    sessionId: null,
    mode: "conversation",
    connection: "disconnected",
    transcript: [],
    pendingElicit: null,
    toasts: [],
    requestedItems: [],
    reportedSteps: [],
    lastError: null,
  };

  private clientSeq = 0;
  private closeEvents: (() => void) | null = null;
  private listeners: Array<(state: ConsoleState) => void> = [];

  constructor(
    private readonly transport: Transport,
    private readonly schemaName: string,
    private readonly chips: ChipTable = new Map(),
    private readonly sessionIdFactory: () => string = () =>
      `console-${Date.now().toString(36)}-${Math.floor(Math.random() * 1e6).toString(36)}`,
  ) {}

  onChange(listener: (state: ConsoleState) => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  /** The wire log as rendered: one message per transcript entry, in order. */
  wireLog(): WireMessage[] {
    return this.state.transcript.map((entry) => entry.message);
  }

  async connect(mode: string): Promise<void> {
    this.state.mode = mode;
    this.state.connection = "connecting";
    this.state.lastError = null;
    this.notify();
    const sessionId = this.sessionIdFactory();
    this.clientSeq = 1;
    const startMsg = sessionStart(sessionId, this.clientSeq, this.schemaName, mode);
    try {
      await this.transport.createSession(startMsg);
    } catch (err) {
      this.state.connection = "disconnected";
      this.state.lastError = String(err);
      this.notify();
      return;
    }
    this.state.sessionId = sessionId;
    this.state.connection = "live";
    this.state.transcript.push({
      speaker: "system",
      text: `session started (${mode})`,
      seq: startMsg.seq,
      channel: "lifecycle",
      message: startMsg,
    });
    this.closeEvents = this.transport.openEvents(
      sessionId,
      (msg) => this.onEventTurn(msg),
      () => undefined, // ended sessions close the stream; nothing to do
    );
    this.notify();
  }

  canSend(text: string): boolean {
    return this.state.connection === "live" && text.trim().length > 0;
  }

  async sendUtterance(text: string): Promise<void> {
    if (!this.canSend(text) || this.state.sessionId === null) return;
    const sessionId = this.state.sessionId;
    this.clientSeq += 1;
    const msg = userTurn(sessionId, this.clientSeq, text);
    const entry: TranscriptEntry = {
      speaker: "user",
      text,
      seq: msg.seq,
      channel: "turn",
      message: msg,
    };
    this.state.transcript.push(entry); // rendered immediately
    this.state.pendingElicit = null;
    this.notify();
    let replies: WireMessage[];
    try {
      replies = await this.transport.sendTurn(sessionId, msg);
    } catch (err) {
      this.state.lastError = String(err);
      this.notify();
      return;
    }
    for (const reply of replies) {
      this.insertRobotTurn(reply, "turn");
    }
    this.anchorUserEntry(entry, replies);
    const last = replies[replies.length - 1];
    if (last !== undefined) {
      const body = last.body as unknown as RobotTurnBody;
      if (body.action === "elicit" && body.slot !== undefined) {
        this.state.pendingElicit = {
          slot: body.slot,
          prompt: body.text,
          chips: this.chips.get(body.slot) ?? [],
        };
      }
    }
    this.notify();
  }

  /** Quick-reply chips just send the catalog value as the utterance. */
  async answerWithChip(value: string): Promise<void> {
    await this.sendUtterance(value);
  }

  async endSession(): Promise<void> {
    if (this.state.sessionId === null || this.state.connection !== "live") return;
    try {
      const msg = await this.transport.endSession(this.state.sessionId);
      this.state.transcript.push({
        speaker: "system",
        text: `session ended (${String((msg.body as { reason?: string }).reason ?? "")})`,
        seq: msg.seq,
        channel: "lifecycle",
        message: msg,
      });
    } catch (err) {
      this.state.lastError = String(err);
    }
    this.closeEvents?.();
    this.closeEvents = null;
    this.state.connection = "ended";
    this.state.pendingElicit = null;
    this.notify();
  }

  private onEventTurn(msg: WireMessage): void {
    this.insertRobotTurn(msg, "event");
    const body = msg.body as unknown as RobotTurnBody;
    this.state.toasts.push(body.text);
    this.notify();
  }

  /** Insert a robot turn keeping server-seq order among robot entries. */
  private insertRobotTurn(msg: WireMessage, channel: "turn" | "event"): void {
    const body = msg.body as unknown as RobotTurnBody;
    if (body.action === "api_call") {
      if (body.api === "fetch_item" || body.api === "confirm_alternative") {
        const item = body.args?.item ?? body.args?.alternative;
        if (item !== undefined) this.state.requestedItems.push(item);
      }
      if (body.api === "report_done") {
        const step = Number(body.args?.step);
        if (Number.isInteger(step)) this.state.reportedSteps.push(step);
      }
    }
    const entry: TranscriptEntry = {
      speaker: "robot",
      text: body.text,
      seq: msg.seq,
      channel,
      message: msg,
    };
    const transcript = this.state.transcript;
    let at = transcript.length;
    while (at > 0) {
      const prev = transcript[at - 1];
      if (prev === undefined) break;
      const prevKey = prev.speaker === "robot" ? prev.seq : prev.anchorSeq;
      if (prevKey !== undefined && prevKey > entry.seq) {
        at -= 1;
      } else {
        break;
      }
    }
    transcript.splice(at, 0, entry);
  }

  /** Re-anchor a user entry directly before its first reply; late event
   * turns that were emitted before this exchange then sort ahead of it. */
  private anchorUserEntry(entry: TranscriptEntry, replies: WireMessage[]): void {
    const first = replies[0];
    if (first === undefined) return;
    entry.anchorSeq = first.seq;
    const transcript = this.state.transcript;
    const current = transcript.indexOf(entry);
    if (current < 0) return;
    transcript.splice(current, 1);
    const target = transcript.findIndex(
      (e) => e.speaker === "robot" && e.seq === first.seq,
    );
    transcript.splice(target < 0 ? transcript.length : target, 0, entry);
  }

  dismissToast(index: number): void {
    this.state.toasts.splice(index, 1);
    this.notify();
  }
}
