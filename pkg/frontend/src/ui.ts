/** DOM wiring: renders ChatViewState and routes events back through
 * the pure update functions.  All dialog behavior lives server-side;
 * this file only draws and forwards. */

import { ApiClient } from "./api.js";
import {
  applyFailure,
  applyOpened,
  applyReply,
  beginSend,
  ChatViewState,
  initialState,
  inputDisabled,
  qudIndex,
  togglePanel,
} from "./view.js";

interface Elements {
  transcript: HTMLElement;
  chips: HTMLElement;
  input: HTMLInputElement;
  send: HTMLButtonElement;
  banner: HTMLElement;
  panel: HTMLElement;
  panelToggle: HTMLButtonElement;
  newSession: HTMLButtonElement;
}

export class ChatApp {
  private state: ChatViewState = initialState();

  constructor(
    private readonly api: ApiClient,
    private readonly el: Elements,
  ) {
    this.el.send.addEventListener("click", () => this.submit());
    this.el.input.addEventListener("keydown", (event) => {
      if (event.key === "Enter") this.submit();
    });
    this.el.panelToggle.addEventListener("click", () => {
      this.state = togglePanel(this.state);
      this.render();
    });
    this.el.newSession.addEventListener("click", () => void this.start());
  }

  async start(): Promise<void> {
    try {
      const opened = await this.api.createSession();
      this.state = applyOpened(this.state, opened);
    } catch (error) {
      this.state = { ...this.state, error: describe(error) };
    }
    this.render();
  }

  private submit(): void {
    const text = this.el.input.value.trim();
    if (!text || inputDisabled(this.state)) return;
    this.el.input.value = "";
    void this.send(text);
  }

  async send(text: string): Promise<void> {
    const sid = this.state.sessionId;
    if (sid === null || this.state.busy || this.state.ended) return;
    this.state = beginSend(this.state);
    this.render();
    try {
      const reply = await this.api.postUtterance(sid, text);
      this.state = applyReply(this.state, text, reply);
    } catch (error) {
      this.state = applyFailure(this.state, text, describe(error));
    }
    this.render();
  }

  render(): void {
    const { el, state } = this;

    el.transcript.replaceChildren(
      ...state.transcript.map((turn) => {
        const row = document.createElement("div");
        row.className = `turn ${turn.speaker}`;
        const bubble = document.createElement("div");
        bubble.className = "bubble";
        bubble.textContent = turn.surface;
        row.appendChild(bubble);
        return row;
      }),
    );
    el.transcript.scrollTop = el.transcript.scrollHeight;

    el.chips.replaceChildren(
      ...state.chips.map((chip) => {
        const button = document.createElement("button");
        button.className = "chip";
        button.textContent = chip.label;
        button.disabled = inputDisabled(state);
        button.addEventListener("click", () => void this.send(chip.text));
        return button;
      }),
    );

    el.input.disabled = inputDisabled(state);
    el.send.disabled = inputDisabled(state);
    el.input.placeholder = state.ended
      ? "The dialog has ended."
      : "Type your message";

    el.banner.replaceChildren();
    if (state.error !== null) {
      el.banner.appendChild(document.createTextNode(state.error));
      if (state.retryText !== null) {
        const retry = document.createElement("button");
        retry.textContent = "Retry";
        const text = state.retryText;
        retry.addEventListener("click", () => void this.send(text));
        el.banner.appendChild(retry);
      }
    }
    el.banner.hidden = state.error === null;

    el.panelToggle.textContent = state.panelOpen
      ? "Hide dialog state"
      : "Show dialog state";
    el.panel.hidden = !state.panelOpen;
    if (state.panelOpen && state.snapshot !== null) {
      el.panel.replaceChildren(renderSnapshot(state.snapshot));
    }
  }

  viewState(): ChatViewState {
    return this.state;
  }
}

function renderSnapshot(snapshot: {
  com: string[];
  issue: string[];
  qud: string | null;
  action: string | null;
}): HTMLElement {
  const root = document.createElement("div");

  const com = section("Shared commitments");
  const comList = document.createElement("ul");
  for (const fact of snapshot.com) {
    const item = document.createElement("li");
    item.textContent = fact;
    comList.appendChild(item);
  }
  com.appendChild(comList);
  root.appendChild(com);

  const issue = section("Open questions (top last)");
  const stack = document.createElement("ol");
  const highlight = qudIndex({ ...snapshot, ended: false });
  snapshot.issue.forEach((question, i) => {
    const item = document.createElement("li");
    item.textContent = question;
    if (i === highlight) item.className = "qud";
    stack.appendChild(item);
  });
  issue.appendChild(stack);
  root.appendChild(issue);

  const action = section("Current action");
  action.appendChild(
    document.createTextNode(snapshot.action === null ? "none" : snapshot.action),
  );
  root.appendChild(action);
  return root;
}

function section(title: string): HTMLElement {
  const box = document.createElement("section");
  const heading = document.createElement("h3");
  heading.textContent = title;
  box.appendChild(heading);
  return box;
}

function describe(error: unknown): string {
  if (error instanceof Error) return error.message;
  return String(error);
}
