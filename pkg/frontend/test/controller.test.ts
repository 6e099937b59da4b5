/**
 * Scripted console sessions against a fake gateway transport.
 *
 * The fake mimics the real gateway's observable contract: a per-session
 * server sequence counter shared by the turn and event channels, scripted
 * replies per utterance, and event pushes. It records every client-visible
 * message in emission order, which is exactly what the rendered transcript
 * must mirror.
 */

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import {
  ChipTable,
  ConsoleController,
  SchemaDoc,
  chipTableFromSchema,
} from "../src/controller.js";
import { Transport } from "../src/transport.js";
import { WireMessage } from "../src/wire.js";

const schemaDoc = JSON.parse(
  readFileSync(join(__dirname, "..", "assembly.schema.json"), "utf-8"),
) as SchemaDoc;

type Script = Record<string, Array<Record<string, unknown>>>;

class FakeTransport implements Transport {
  serverSeq = 0;
  wireLog: WireMessage[] = [];
  private onEvent: ((msg: WireMessage) => void) | null = null;
  private pendingEvents: WireMessage[] = [];
  holdEvents = false;

  constructor(private readonly script: Script) {}

  private robotTurn(session: string, body: Record<string, unknown>): WireMessage {
    this.serverSeq += 1;
    return { version: "1.0", session, seq: this.serverSeq, kind: "RobotTurn", body };
  }

  async createSession(msg: WireMessage): Promise<string> {
    this.wireLog.push(msg);
    return msg.session;
  }

  async sendTurn(sessionId: string, msg: WireMessage): Promise<WireMessage[]> {
    this.wireLog.push(msg);
    const text = (msg.body as { text: string }).text;
    const bodies = this.script[text];
    if (bodies === undefined) throw new Error(`unscripted utterance: ${text}`);
    const replies = bodies.map((body) => this.robotTurn(sessionId, body));
    this.wireLog.push(...replies);
    return replies;
  }

  openEvents(
    _sessionId: string,
    onTurn: (msg: WireMessage) => void,
  ): () => void {
    this.onEvent = onTurn;
    return () => {
      this.onEvent = null;
    };
  }

  /** Gateway-side event emission; delivery may be delayed via holdEvents. */
  pushEvent(sessionId: string, text: string): void {
    const turn = this.robotTurn(sessionId, { action: "respond", text });
    this.wireLog.push(turn);
    if (this.holdEvents) {
      this.pendingEvents.push(turn);
    } else {
      this.onEvent?.(turn);
    }
  }

  releaseEvents(): void {
    for (const turn of this.pendingEvents.splice(0)) {
      this.onEvent?.(turn);
    }
  }

  async endSession(sessionId: string): Promise<WireMessage> {
    this.serverSeq += 1;
    const msg: WireMessage = {
      version: "1.0",
      session: sessionId,
      seq: this.serverSeq,
      kind: "SessionEnd",
      body: { reason: "client request" },
    };
    this.wireLog.push(msg);
    return msg;
  }
}

const SCRIPT: Script = {
  "bring me a component": [
    { action: "elicit", text: "Which component should I bring?", slot: "item" },
  ],
  "base plate": [
    { action: "api_call", text: "", api: "fetch_item", args: { item: "base plate" } },
    { action: "end", text: "I placed the base plate on the workbench." },
  ],
  "i finished step one": [
    { action: "api_call", text: "", api: "report_done", args: { step: "1" } },
    { action: "end", text: "Step 1 is recorded. Nice work." },
  ],
};

function makeController(fake: FakeTransport, chips?: ChipTable): ConsoleController {
  let n = 0;
  return new ConsoleController(
    fake,
    "assembly",
    chips ?? chipTableFromSchema(schemaDoc),
    () => `t${++n}`,
  );
}

describe("chip table", () => {
  it("maps slot names to catalog values, pooling shared names", () => {
    const chips = chipTableFromSchema(schemaDoc);
    expect(chips.get("decision")).toEqual(["yes", "no"]);
    // "item" is used by both the component and the tool dialogue
    expect(chips.get("item")).toContain("gear");
    expect(chips.get("item")).toContain("wrench");
    expect(chips.has("step")).toBe(false); // free-text slots get no chips
  });
});

describe("console session", () => {
  it("connects, elicits with chips, answers, and mirrors the wire log", async () => {
    const fake = new FakeTransport(SCRIPT);
    const controller = makeController(fake);
    await controller.connect("conversation");
    expect(controller.state.connection).toBe("live");

    await controller.sendUtterance("bring me a component");
    const elicit = controller.state.pendingElicit;
    expect(elicit).not.toBeNull();
    expect(elicit!.slot).toBe("item");
    expect(elicit!.chips).toContain("base plate");

    await controller.answerWithChip("base plate");
    expect(controller.state.pendingElicit).toBeNull();
    expect(controller.state.requestedItems).toEqual(["base plate"]);

    // the rendered transcript mirrors the fake gateway's log exactly
    expect(controller.wireLog()).toEqual(fake.wireLog);
    const texts = controller.state.transcript.map((e) => e.text);
    expect(texts).toEqual([
      "session started (conversation)",
      "bring me a component",
      "Which component should I bring?",
      "base plate",
      "",
      "I placed the base plate on the workbench.",
    ]);
  });

  it("renders robot-initiated events as toasts and transcript entries", async () => {
    const fake = new FakeTransport(SCRIPT);
    const controller = makeController(fake);
    await controller.connect("conversation");
    await controller.sendUtterance("i finished step one");
    fake.pushEvent("t1", "Step 1 is finished. For the next step you will need the bracket.");
    expect(controller.state.toasts).toHaveLength(1);
    expect(controller.state.reportedSteps).toEqual([1]);
    expect(controller.wireLog()).toEqual(fake.wireLog);
  });

  it("reorders a late event turn by its server seq", async () => {
    const fake = new FakeTransport(SCRIPT);
    const controller = makeController(fake);
    await controller.connect("conversation");
    await controller.sendUtterance("i finished step one");
    fake.holdEvents = true;
    fake.pushEvent("t1", "Step 1 is finished."); // emitted now, delivered later
    await controller.sendUtterance("bring me a component");
    fake.releaseEvents(); // arrives after the next exchange completed
    expect(controller.wireLog()).toEqual(fake.wireLog);
  });

  it("disables the composer after SessionEnd", async () => {
    const fake = new FakeTransport(SCRIPT);
    const controller = makeController(fake);
    await controller.connect("conversation");
    expect(controller.canSend("hello")).toBe(true);
    expect(controller.canSend("   ")).toBe(false); // empty input: send disabled
    await controller.endSession();
    expect(controller.state.connection).toBe("ended");
    expect(controller.canSend("hello")).toBe(false);
    const before = controller.state.transcript.length;
    await controller.sendUtterance("hello");
    expect(controller.state.transcript.length).toBe(before); // nothing sent
    expect(controller.state.transcript.at(-1)!.message.kind).toBe("SessionEnd");
  });

  it("shows a disconnected state when the server is unreachable", async () => {
    const failing: Transport = {
      createSession: async () => {
        throw new Error("ECONNREFUSED");
      },
      sendTurn: async () => [],
      openEvents: () => () => undefined,
      endSession: async () => {
        throw new Error("unreachable");
      },
    };
    const controller = new ConsoleController(failing, "assembly");
    await controller.connect("conversation");
    expect(controller.state.connection).toBe("disconnected");
    expect(controller.state.lastError).toContain("ECONNREFUSED");
    expect(controller.canSend("hi")).toBe(false);
  });
});
