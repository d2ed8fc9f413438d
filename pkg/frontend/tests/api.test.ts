import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("wire client", () => {
  it("opens sessions with a bare POST", async () => {
    const mock = vi.fn().mockResolvedValue(
      jsonResponse(200, {
        session: "s1",
        system_turn: "Hello!",
        acts: [],
        public_snapshot: { com: [], issue: [], qud: null, action: null, ended: false },
      }),
    );
    vi.stubGlobal("fetch", mock);
    const client = new ApiClient("http://host:1/");
    const opened = await client.createSession();
    expect(opened.session).toBe("s1");
    expect(mock).toHaveBeenCalledWith("http://host:1/sessions", {
      method: "POST",
    });
  });

  it("posts utterances as JSON bodies", async () => {
    const mock = vi.fn().mockResolvedValue(jsonResponse(200, { ok: true }));
    vi.stubGlobal("fetch", mock);
    await new ApiClient("http://host:1").postUtterance("s1", "hello");
    const [url, init] = mock.mock.calls[0] as [string, RequestInit];
    expect(url).toBe("http://host:1/sessions/s1/utterances");
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body as string)).toEqual({ text: "hello" });
  });

  it("reads transcripts and state with GET", async () => {
    const mock = vi.fn().mockImplementation(() =>
      Promise.resolve(jsonResponse(200, {})),
    );
    vi.stubGlobal("fetch", mock);
    const client = new ApiClient("http://host:1");
    await client.getTranscript("s1");
    await client.getState("s1");
    expect(mock.mock.calls.map((c) => c[0])).toEqual([
      "http://host:1/sessions/s1/transcript",
      "http://host:1/sessions/s1/state",
    ]);
  });

  it("surfaces server errors with their status and message", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn().mockResolvedValue(jsonResponse(404, { error: "unknown session" })),
    );
    const client = new ApiClient("http://host:1");
    const failure = await client.getState("nope").catch((e: unknown) => e);
    expect(failure).toBeInstanceOf(ApiError);
    expect((failure as ApiError).status).toBe(404);
    expect((failure as ApiError).message).toBe("unknown session");
  });

  it("propagates transport failures", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn().mockRejectedValue(new TypeError("fetch failed")),
    );
    const client = new ApiClient("http://host:1");
    await expect(client.createSession()).rejects.toThrow("fetch failed");
  });
});
