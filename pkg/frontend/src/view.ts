/**
 * DOM rendering: a thin projection of ConsoleState onto the page.
 * All behaviour lives in the controller; this file only draws.
 */

import { ConsoleController, ConsoleState } from "./controller.js";

export interface TaskDoc {
  areas: { name: string; access: string }[];
  items: { name: string; kind: string; area: string }[];
  steps: { index: number }[];
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class ConsoleView {
  private transcriptBox: HTMLElement;
  private chipsBox: HTMLElement;
  private toastBox: HTMLElement;
  private statusBox: HTMLElement;
  private workspaceBox: HTMLElement;
  private stepsBox: HTMLElement;
  private input: HTMLInputElement;
  private sendButton: HTMLButtonElement;
  private endButton: HTMLButtonElement;

  constructor(
    root: HTMLElement,
    private readonly controller: ConsoleController,
    private readonly task: TaskDoc | null,
  ) {
    this.statusBox = root.querySelector("#status") as HTMLElement;
    this.transcriptBox = root.querySelector("#transcript") as HTMLElement;
    this.chipsBox = root.querySelector("#chips") as HTMLElement;
    this.toastBox = root.querySelector("#toasts") as HTMLElement;
    this.workspaceBox = root.querySelector("#workspace") as HTMLElement;
    this.stepsBox = root.querySelector("#steps") as HTMLElement;
    this.input = root.querySelector("#composer-input") as HTMLInputElement;
    this.sendButton = root.querySelector("#composer-send") as HTMLButtonElement;
    this.endButton = root.querySelector("#end-session") as HTMLButtonElement;

    this.sendButton.addEventListener("click", () => this.submit());
    this.input.addEventListener("keydown", (event) => {
      if (event.key === "Enter") this.submit();
    });
    this.input.addEventListener("input", () => this.syncComposer(controller.state));
    this.endButton.addEventListener("click", () => void controller.endSession());
    controller.onChange((state) => this.render(state));
  }

  private submit(): void {
    const text = this.input.value;
    if (!this.controller.canSend(text)) return;
    this.input.value = "";
    void this.controller.sendUtterance(text);
  }

  private syncComposer(state: ConsoleState): void {
    const live = state.connection === "live";
    this.input.disabled = !live;
    this.sendButton.disabled = !this.controller.canSend(this.input.value);
    this.endButton.disabled = !live;
  }

  render(state: ConsoleState): void {
    this.statusBox.textContent =
      state.connection === "live"
        ? `connected: ${state.sessionId} (${state.mode})`
        : state.connection;
    this.statusBox.dataset.state = state.connection;
    if (state.lastError) {
      this.statusBox.textContent += ` — ${state.lastError}`;
    }

    this.transcriptBox.replaceChildren(
      ...state.transcript.map((entry) => {
        const line = el("div", `turn turn-${entry.speaker}`);
        const label =
          entry.channel === "event" ? `${entry.speaker} (initiated)` : entry.speaker;
        line.append(el("span", "speaker", label), el("span", "text", entry.text));
        if (entry.message.kind === "RobotTurn") {
          const body = entry.message.body as { action?: string };
          if (body.action === "api_call") line.classList.add("turn-api");
        }
        return line;
      }),
    );
    this.transcriptBox.scrollTop = this.transcriptBox.scrollHeight;

    this.chipsBox.replaceChildren();
    if (state.pendingElicit) {
      this.chipsBox.append(el("span", "elicit-prompt", state.pendingElicit.prompt));
      for (const value of state.pendingElicit.chips) {
        const chip = el("button", "chip", value);
        chip.addEventListener("click", () => void this.controller.answerWithChip(value));
        this.chipsBox.append(chip);
      }
    }

    this.toastBox.replaceChildren(
      ...state.toasts.map((text, index) => {
        const toast = el("div", "toast", text);
        toast.addEventListener("click", () => this.controller.dismissToast(index));
        return toast;
      }),
    );

    if (this.task) {
      const requested = new Set(state.requestedItems);
      this.workspaceBox.replaceChildren(
        ...this.task.areas.map((area) => {
          const panel = el("div", "area");
          panel.append(el("h3", undefined, `${area.name} (${area.access})`));
          for (const item of this.task!.items.filter((i) => i.area === area.name)) {
            const badge = el("span", "item", item.name);
            if (requested.has(item.name)) badge.classList.add("item-requested");
            panel.append(badge);
          }
          return panel;
        }),
      );
      const reported = new Set(state.reportedSteps);
      this.stepsBox.replaceChildren(
        ...this.task.steps.map((step) => {
          const dot = el("span", "step", String(step.index));
          if (reported.has(step.index)) dot.classList.add("step-reported");
          return dot;
        }),
      );
    }

    this.syncComposer(state);
  }
}
