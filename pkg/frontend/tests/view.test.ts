import { describe, expect, it } from "vitest";

import type { ActRecord, OpenedSession, Reply, Snapshot } from "../src/api.js";
import {
  applyFailure,
  applyOpened,
  applyReply,
  beginSend,
  chipsForActs,
  initialState,
  inputDisabled,
  optionChip,
  parseChoiceOptions,
  qudIndex,
  togglePanel,
} from "../src/view.js";

const sysAct = (kind: string, value?: string, type = "prop"): ActRecord => ({
  kind,
  speaker: "system",
  content: value === undefined ? null : { type, value },
  surface: null,
});

const snapshot = (over: Partial<Snapshot> = {}): Snapshot => ({
  com: [],
  issue: [],
  qud: null,
  action: null,
  ended: false,
  ...over,
});

const opened: OpenedSession = {
  session: "s1",
  system_turn: "Hello!",
  acts: [sysAct("greet")],
  public_snapshot: snapshot(),
};

const reply = (over: Partial<Reply> = {}): Reply => ({
  system_turn: "Ok.",
  acts: [sysAct("acknowledge")],
  public_snapshot: snapshot(),
  user_acts: [],
  ended: false,
  ...over,
});

describe("choice question parsing", () => {
  it("splits top-level options only", () => {
    expect(
      parseChoiceOptions(
        "?set(question(document), question(definition), question(explanation))",
      ),
    ).toEqual([
      "question(document)",
      "question(definition)",
      "question(explanation)",
    ]);
  });

  it("rejects other question shapes", () => {
    expect(parseChoiceOptions("?question(q)")).toEqual([]);
    expect(parseChoiceOptions("?endOfSearch")).toEqual([]);
  });

  it("maps the search topics to canned utterances", () => {
    expect(optionChip("question(document)")).toEqual({
      label: "Documents",
      text: "documents",
    });
    expect(optionChip("question(definition)").text).toBe("a definition");
    expect(optionChip("question(explanation)").text).toBe("an explanation");
  });

  it("humanizes unknown options", () => {
    expect(optionChip("question(side_effects)")).toEqual({
      label: "Side effects",
      text: "side effects",
    });
  });
});

describe("chip derivation", () => {
  it("is empty without a choice ask, offer, or suggestion", () => {
    expect(chipsForActs([sysAct("greet")])).toEqual([]);
    expect(chipsForActs([sysAct("ask", "?question(q)", "question")])).toEqual([]);
    expect(chipsForActs([sysAct("inform", "nbdocuments(34)")])).toEqual([]);
  });

  it("renders one chip per choice option", () => {
    const chips = chipsForActs([
      sysAct(
        "ask",
        "?set(question(document), question(definition))",
        "question",
      ),
    ]);
    expect(chips.map((c) => c.label)).toEqual(["Documents", "A definition"]);
  });

  it("renders accept and decline for offers and suggestions", () => {
    for (const kind of ["offer", "suggest"]) {
      const chips = chipsForActs([sysAct(kind, "metaTerm(allergology)")]);
      expect(chips.map((c) => c.text)).toEqual(["yes", "no"]);
    }
  });
});

describe("view updates", () => {
  it("a new session shows exactly one greeting turn", () => {
    const state = applyOpened(initialState(), opened);
    expect(state.transcript).toEqual([
      { speaker: "system", surface: "Hello!" },
    ]);
    expect(state.sessionId).toBe("s1");
    expect(state.ended).toBe(false);
  });

  it("keeps the panel preference across sessions", () => {
    const open = togglePanel(initialState());
    expect(applyOpened(open, opened).panelOpen).toBe(true);
  });

  it("locks input while a request is in flight", () => {
    let state = applyOpened(initialState(), opened);
    expect(inputDisabled(state)).toBe(false);
    state = beginSend(state);
    expect(inputDisabled(state)).toBe(true);
    state = applyReply(state, "hello", reply());
    expect(inputDisabled(state)).toBe(false);
  });

  it("appends the user and system turns in order", () => {
    let state = applyOpened(initialState(), opened);
    state = applyReply(beginSend(state), "hello", reply());
    expect(state.transcript.map((t) => t.speaker)).toEqual([
      "system",
      "user",
      "system",
    ]);
    expect(state.transcript[1].surface).toBe("hello");
    expect(state.transcript[2].surface).toBe("Ok.");
  });

  it("refreshes chips and snapshot from the reply", () => {
    let state = applyOpened(initialState(), opened);
    const snap = snapshot({ issue: ["?question(q)"], qud: "?question(q)" });
    state = applyReply(
      beginSend(state),
      "hello",
      reply({
        acts: [sysAct("offer", "metaTerm(allergology)")],
        public_snapshot: snap,
      }),
    );
    expect(state.chips.map((c) => c.label)).toEqual(["Yes", "No"]);
    expect(state.snapshot).toEqual(snap);
  });

  it("ending the dialog disables input and clears chips", () => {
    let state = applyOpened(initialState(), opened);
    state = applyReply(
      beginSend(state),
      "bye",
      reply({
        system_turn: "Bye, have a nice day!",
        acts: [sysAct("bye")],
        public_snapshot: snapshot({ ended: true }),
        ended: true,
      }),
    );
    expect(state.ended).toBe(true);
    expect(inputDisabled(state)).toBe(true);
    expect(state.chips).toEqual([]);
    expect(state.transcript.at(-1)?.surface).toBe("Bye, have a nice day!");
  });

  it("drops nothing into the transcript for an inert post-end reply", () => {
    let state = applyOpened(initialState(), opened);
    const before = state.transcript.length;
    state = applyReply(
      beginSend(state),
      "hello?",
      reply({
        system_turn: "",
        acts: [],
        public_snapshot: snapshot({ ended: true }),
        ended: true,
      }),
    );
    expect(state.transcript.length).toBe(before);
  });

  it("transport failure keeps the transcript and offers a retry", () => {
    let state = applyOpened(initialState(), opened);
    const transcript = state.transcript;
    state = applyFailure(beginSend(state), "hello", "server unreachable");
    expect(state.transcript).toEqual(transcript);
    expect(state.error).toBe("server unreachable");
    expect(state.retryText).toBe("hello");
    expect(inputDisabled(state)).toBe(false);
  });

  it("the state panel is hidden by default and toggles", () => {
    const state = initialState();
    expect(state.panelOpen).toBe(false);
    expect(togglePanel(state).panelOpen).toBe(true);
    expect(togglePanel(togglePanel(state)).panelOpen).toBe(false);
  });
});

describe("question under discussion highlight", () => {
  it("points at the top of the issue stack", () => {
    const snap = snapshot({
      issue: ["?question(q)", "?endOfSearch"],
      qud: "?endOfSearch",
    });
    expect(qudIndex(snap)).toBe(snap.issue.length - 1);
    expect(snap.issue[qudIndex(snap)]).toBe(snap.qud);
  });

  it("is absent when no question is open", () => {
    expect(qudIndex(snapshot())).toBe(-1);
  });
});
