/** Typed client for the dialog server's JSON-over-HTTP wire API.
 *
 * Every displayed fact in the UI originates from one of these
 * responses; the client adds no dialog logic of its own.
 */

export interface ActContent {
  type: string;
  value: string;
}

export interface ActRecord {
  kind: string;
  speaker: string;
  content: ActContent | null;
  surface: string | null;
}

export interface Snapshot {
  com: string[];
  issue: string[];
  qud: string | null;
  action: string | null;
  ended: boolean;
}

export interface OpenedSession {
  session: string;
  system_turn: string;
  acts: ActRecord[];
  public_snapshot: Snapshot;
}

export interface Reply {
  system_turn: string;
  acts: ActRecord[];
  public_snapshot: Snapshot;
  user_acts: ActRecord[];
  ended: boolean;
}

export interface TurnRecord {
  index: number;
  speaker: string;
  surface: string;
  acts: ActRecord[];
  snapshot: Snapshot;
}

export interface Transcript {
  session: string;
  turns: TurnRecord[];
}

export interface EndedSession {
  session: string;
  ended: boolean;
  public_snapshot: Snapshot;
}

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { error?: string };
      if (body.error) detail = body.error;
    } catch {
      /* non-JSON error body; keep the status text */
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  createSession(): Promise<OpenedSession> {
    return fetch(`${this.baseUrl}/sessions`, { method: "POST" }).then((r) =>
      asJson<OpenedSession>(r),
    );
  }

  postUtterance(sessionId: string, text: string): Promise<Reply> {
    return fetch(`${this.baseUrl}/sessions/${sessionId}/utterances`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    }).then((r) => asJson<Reply>(r));
  }

  getTranscript(sessionId: string): Promise<Transcript> {
    return fetch(`${this.baseUrl}/sessions/${sessionId}/transcript`).then((r) =>
      asJson<Transcript>(r),
    );
  }

  getState(sessionId: string): Promise<Snapshot> {
    return fetch(`${this.baseUrl}/sessions/${sessionId}/state`).then((r) =>
      asJson<Snapshot>(r),
    );
  }

  endSession(sessionId: string): Promise<EndedSession> {
    return fetch(`${this.baseUrl}/sessions/${sessionId}/end`, {
      method: "POST",
    }).then((r) => asJson<EndedSession>(r));
  }
}
