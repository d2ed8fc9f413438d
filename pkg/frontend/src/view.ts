/** Pure view-state logic for the chat client.
 *
 * Everything here is a plain function from old state plus a wire
 * response to new state, so the whole interaction model is testable
 * without a browser.  Chips are canned utterances: clicking one sends
 * exactly the text a user could have typed, nothing more.
 */

import type { ActRecord, OpenedSession, Reply, Snapshot } from "./api.js";

export interface Chip {
  label: string;
  text: string;
}

export interface ViewTurn {
  speaker: "user" | "system";
  surface: string;
}

export interface ChatViewState {
  sessionId: string | null;
  transcript: ViewTurn[];
  chips: Chip[];
  snapshot: Snapshot | null;
  busy: boolean;
  ended: boolean;
  error: string | null;
  retryText: string | null;
  panelOpen: boolean;
}

export function initialState(): ChatViewState {
  return {
    sessionId: null,
    transcript: [],
    chips: [],
    snapshot: null,
    busy: false,
    ended: false,
    error: null,
    retryText: null,
    panelOpen: false,
  };
}

/** Split the rendered form of a choice question into its options:
 * "?set(question(document), question(definition))" gives
 * ["question(document)", "question(definition)"]. */
export function parseChoiceOptions(value: string): string[] {
  if (!value.startsWith("?set(") || !value.endsWith(")")) return [];
  const inner = value.slice("?set(".length, -1);
  const options: string[] = [];
  let depth = 0;
  let current = "";
  for (const ch of inner) {
    if (ch === "(") depth += 1;
    if (ch === ")") depth -= 1;
    if (ch === "," && depth === 0) {
      options.push(current.trim());
      current = "";
    } else {
      current += ch;
    }
  }
  if (current.trim()) options.push(current.trim());
  return options;
}

const TOPIC_CHIPS: Record<string, Chip> = {
  document: { label: "Documents", text: "documents" },
  definition: { label: "A definition", text: "a definition" },
  explanation: { label: "An explanation", text: "an explanation" },
};

function innerTerm(option: string): string {
  const open = option.indexOf("(");
  if (open < 0 || !option.endsWith(")")) return option;
  return option.slice(open + 1, -1);
}

export function optionChip(option: string): Chip {
  const term = innerTerm(option);
  const known = TOPIC_CHIPS[term];
  if (known) return { ...known };
  const text = term.replace(/_/g, " ");
  return { label: text.charAt(0).toUpperCase() + text.slice(1), text };
}

/** Chips for the latest system acts: one per option of a choice
 * question, and accept/decline for an offer or suggestion.  Present
 * iff such an act is present. */
export function chipsForActs(acts: ActRecord[]): Chip[] {
  const chips: Chip[] = [];
  for (const act of acts) {
    if (
      act.kind === "ask" &&
      act.content !== null &&
      act.content.type === "question"
    ) {
      for (const option of parseChoiceOptions(act.content.value)) {
        chips.push(optionChip(option));
      }
    }
  }
  if (acts.some((a) => a.kind === "offer" || a.kind === "suggest")) {
    chips.push({ label: "Yes", text: "yes" });
    chips.push({ label: "No", text: "no" });
  }
  return chips;
}

export function applyOpened(
  state: ChatViewState,
  opened: OpenedSession,
): ChatViewState {
  return {
    ...initialState(),
    panelOpen: state.panelOpen,
    sessionId: opened.session,
    transcript: [{ speaker: "system", surface: opened.system_turn }],
    chips: chipsForActs(opened.acts),
    snapshot: opened.public_snapshot,
    ended: opened.public_snapshot.ended,
  };
}

/** A request left the station: lock the input and clear stale chips
 * so only one utterance is in flight per session. */
export function beginSend(state: ChatViewState): ChatViewState {
  return { ...state, busy: true, error: null, retryText: null, chips: [] };
}

export function applyReply(
  state: ChatViewState,
  userText: string,
  reply: Reply,
): ChatViewState {
  const transcript = [...state.transcript];
  if (!reply.ended || reply.acts.length > 0 || reply.system_turn !== "") {
    transcript.push({ speaker: "user", surface: userText });
    transcript.push({ speaker: "system", surface: reply.system_turn });
  }
  return {
    ...state,
    busy: false,
    transcript,
    chips: reply.ended ? [] : chipsForActs(reply.acts),
    snapshot: reply.public_snapshot,
    ended: reply.ended,
  };
}

/** Transport failure: keep the transcript untouched, surface the
 * message, and remember the text so one click can retry it. */
export function applyFailure(
  state: ChatViewState,
  userText: string,
  message: string,
): ChatViewState {
  return { ...state, busy: false, error: message, retryText: userText };
}

export function togglePanel(state: ChatViewState): ChatViewState {
  return { ...state, panelOpen: !state.panelOpen };
}

/** Index into snapshot.issue of the question under discussion, for
 * highlighting; the stack is listed bottom to top, so this is the
 * last entry whenever a question is open. */
export function qudIndex(snapshot: Snapshot): number {
  if (snapshot.qud === null) return -1;
  return snapshot.issue.lastIndexOf(snapshot.qud);
}

export function inputDisabled(state: ChatViewState): boolean {
  return state.busy || state.ended || state.sessionId === null;
}
