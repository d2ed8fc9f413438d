"""Session management and the wire API for the dialog engine.

One ``DialogService`` owns shared read-only resources (store, plans,
templates) and a registry of in-memory sessions.  Each session wraps
one engine instance plus its append-only transcript; a per-session
lock serializes utterances so concurrent posts see a total order.
Transcripts can additionally be persisted as one append-only record
file per session under a data directory.

The HTTP layer is a thin JSON adapter over the service methods; the
terminal REPL and the script runner drive exactly the same methods, so
every entry point produces identical act sequences for identical
input.  Only the public half of the dialog state ever crosses the
wire: the belief store, agenda and plan stack stay private.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from . import nl_frontend
from .engine import DialogEngine, EngineConfig
from .info_state import InformationState
from .plan_library import load_builtin_plans, load_plan_file, validate_library
from .speech_acts import ActKind, Speaker, SpeechAct, to_record
from .task_model import FacetStore, load_default_store, load_store


class ServiceError(Exception):
    """Base for request-level failures; carries an HTTP-ish status."""

    status = 500


class UnknownSession(ServiceError):
    status = 404


class BadRequest(ServiceError):
    status = 400


# ------------------------------------------------------------ snapshots


def public_snapshot(state: InformationState) -> dict:
    """The shareable view of a dialog state: commitments, open issues
    (bottom to top), the question under discussion, the action in
    progress.  Nothing from the private half."""
    public = state.public
    return {
        "com": sorted(str(p) for p in public.com),
        "issue": [str(q) for q in public.issue],
        "qud": str(public.qud) if public.qud is not None else None,
        "action": public.action,
        "ended": state.ended,
    }


@dataclass(frozen=True)
class TurnRecord:
    """One transcript entry: who spoke, what was said, which moves it
    carried, and the public state right after."""

    index: int
    speaker: str
    surface: str
    acts: tuple
    snapshot: dict

    def to_record(self) -> dict:
        return {
            "index": self.index,
            "speaker": self.speaker,
            "surface": self.surface,
            "acts": list(self.acts),
            "snapshot": self.snapshot,
        }


@dataclass
class Session:
    id: str
    engine: DialogEngine
    transcript: list[TurnRecord] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    created: str = ""
    updated: str = ""


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


# -------------------------------------------------------------- service


@dataclass(frozen=True)
class ServiceConfig:
    """Where the shared resources come from; None means built-in."""

    terminology_path: str | None = None
    documents_path: str | None = None
    plans_path: str | None = None
    delta_min: int = 3
    delta_max: int = 30
    data_dir: str | None = None


def _load_resources(config: ServiceConfig):
    if (config.terminology_path is None) != (config.documents_path is None):
        raise BadRequest("terminology and documents must be given together")
    if config.terminology_path is None:
        store = load_default_store()
    else:
        store, report = load_store(config.terminology_path, config.documents_path)
        if report.errors:
            raise BadRequest("data rejected: %s" % "; ".join(report.errors))
    if config.plans_path is None:
        plans = load_builtin_plans()
    else:
        plans = load_plan_file(config.plans_path)
    problems = validate_library(plans)
    if problems:
        raise BadRequest("plan library rejected: %s" % "; ".join(problems))
    if config.delta_min < 0 or config.delta_max <= config.delta_min:
        raise BadRequest("need 0 <= delta-min < delta-max")
    return store, plans


class DialogService:
    """Shared resources plus the session registry; every transport
    (HTTP, REPL, script runner) goes through these methods."""

    def __init__(self, config: ServiceConfig | None = None):
        self.config = config or ServiceConfig()
        self.store, self.plans = _load_resources(self.config)
        self.rules = nl_frontend.load_tag_rules()
        self.lexicon = nl_frontend.load_lexicon(self.store)
        self.engine_config = EngineConfig(
            delta_min=self.config.delta_min, delta_max=self.config.delta_max
        )
        self.sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()
        self.data_dir = Path(self.config.data_dir) if self.config.data_dir else None
        if self.data_dir is not None:
            self.data_dir.mkdir(parents=True, exist_ok=True)

    # ------------------------------------------------------- sessions

    def create_session(self) -> dict:
        engine = DialogEngine(self.store, self.plans, self.engine_config)
        session = Session(id=uuid.uuid4().hex, engine=engine)
        session.created = session.updated = _now()
        with self._registry_lock:
            self.sessions[session.id] = session
        with session.lock:
            opening = engine.step()
            record = self._append_system_turn(session, opening)
        return {
            "session": session.id,
            "system_turn": record.surface,
            "acts": list(record.acts),
            "public_snapshot": record.snapshot,
        }

    def _session(self, session_id: str) -> Session:
        with self._registry_lock:
            session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSession("no session %r" % session_id)
        return session

    def post_utterance(self, session_id: str, text: str) -> dict:
        if not isinstance(text, str) or not text.strip():
            raise BadRequest("text must be a non-empty string")
        session = self._session(session_id)
        with session.lock:
            engine = session.engine
            if engine.state.ended:
                return {
                    "system_turn": "",
                    "acts": [],
                    "public_snapshot": public_snapshot(engine.state),
                    "user_acts": [],
                    "ended": True,
                }
            user_acts = nl_frontend.tag_utterance(
                text, ctx=engine.state.public, store=self.store, rules=self.rules
            )
            self._append_turn(session, "user", text.strip(), user_acts)
            moves = engine.step(user_acts)
            record = self._append_system_turn(session, moves)
        return {
            "system_turn": record.surface,
            "acts": list(record.acts),
            "public_snapshot": record.snapshot,
            "user_acts": [to_record(a) for a in user_acts],
            "ended": session.engine.state.ended,
        }

    def get_transcript(self, session_id: str) -> dict:
        session = self._session(session_id)
        with session.lock:
            turns = [t.to_record() for t in session.transcript]
        return {"session": session_id, "turns": turns}

    def get_state(self, session_id: str) -> dict:
        session = self._session(session_id)
        with session.lock:
            return public_snapshot(session.engine.state)

    def end_session(self, session_id: str) -> dict:
        """Close the dialog; a farewell turn is recorded if it was
        still open.  The transcript stays readable afterwards."""
        session = self._session(session_id)
        with session.lock:
            if not session.engine.state.ended:
                bye = SpeechAct(ActKind.BYE, None, Speaker.USER, "")
                self._append_turn(session, "user", "", [bye])
                moves = session.engine.step([bye])
                self._append_system_turn(session, moves)
            return {
                "session": session_id,
                "ended": True,
                "public_snapshot": public_snapshot(session.engine.state),
            }

    # ----------------------------------------------------- transcript

    def _append_turn(self, session, speaker: str, surface: str, acts) -> TurnRecord:
        record = TurnRecord(
            index=len(session.transcript),
            speaker=speaker,
            surface=surface,
            acts=tuple(to_record(a) for a in acts),
            snapshot=public_snapshot(session.engine.state),
        )
        session.transcript.append(record)
        session.updated = _now()
        self._persist(session, record)
        return record

    def _append_system_turn(self, session, moves) -> TurnRecord:
        surface = nl_frontend.render(moves, self.lexicon)
        return self._append_turn(session, "system", surface, moves)

    def _persist(self, session, record: TurnRecord) -> None:
        if self.data_dir is None:
            return
        path = self.data_dir / ("%s.jsonl" % session.id)
        line = json.dumps(record.to_record(), sort_keys=True)
        with open(path, "a", encoding="utf-8") as handle:
            handle.write(line + "\n")


# ------------------------------------------------------------ http wire


class _Handler(BaseHTTPRequestHandler):
    service: DialogService  # set by make_server

    protocol_version = "HTTP/1.1"

    # quiet by default; the CLI decides what to log
    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        pass

    def _reply(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, sort_keys=True).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self):  # CORS preflight for browser clients
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            parsed = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            raise BadRequest("body must be a JSON object")
        if not isinstance(parsed, dict):
            raise BadRequest("body must be a JSON object")
        return parsed

    def _route(self, method: str):
        parts = [p for p in self.path.split("?")[0].split("/") if p]
        service = self.service
        if method == "POST" and parts == ["sessions"]:
            return service.create_session()
        if len(parts) >= 2 and parts[0] == "sessions":
            session_id = parts[1]
            tail = parts[2:]
            if method == "POST" and tail == ["utterances"]:
                return service.post_utterance(session_id, self._body().get("text", ""))
            if method == "GET" and tail == ["transcript"]:
                return service.get_transcript(session_id)
            if method == "GET" and tail == ["state"]:
                return service.get_state(session_id)
            if (method == "POST" and tail == ["end"]) or (method == "DELETE" and not tail):
                return service.end_session(session_id)
        raise UnknownSession("no route for %s %s" % (method, self.path))

    def _handle(self, method: str) -> None:
        try:
            payload = self._route(method)
        except ServiceError as exc:
            self._reply(exc.status, {"error": str(exc)})
        except Exception as exc:  # don't leak a stack through the socket
            self._reply(500, {"error": "internal error: %s" % exc})
        else:
            self._reply(200, payload)

    def do_GET(self):
        self._handle("GET")

    def do_POST(self):
        self._handle("POST")

    def do_DELETE(self):
        self._handle("DELETE")


def make_server(service: DialogService, host: str = "127.0.0.1", port: int = 8140):
    handler = type("BoundHandler", (_Handler,), {"service": service})
    return ThreadingHTTPServer((host, port), handler)


# ---------------------------------------------------------- script runs


def _parse_script_line(line: str):
    """``utterance || expected kinds`` — the annotation is optional."""
    if "||" in line:
        text, expected_raw = line.split("||", 1)
        expected = expected_raw.split()
        return text.strip(), expected
    return line.strip(), None


def run_script(service: DialogService, path: str, out=None) -> int:
    """Drive a fresh session with a line-oriented utterance script.

    Lines are user utterances; ``#`` starts a comment; an optional
    ``|| kind kind ...`` suffix pins the system turn's act kinds.
    Returns 0 when every expectation held, 1 otherwise.
    """
    import sys

    out = out if out is not None else sys.stdout
    with open(path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    created = service.create_session()
    session_id = created["session"]
    out.write("S: %s\n" % created["system_turn"])
    failures = 0
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        text, expected = _parse_script_line(line)
        if not text:
            continue
        reply = service.post_utterance(session_id, text)
        out.write("U: %s\n" % text)
        out.write("S: %s\n" % reply["system_turn"])
        actual = [record["kind"] for record in reply["acts"]]
        if expected is not None and actual != expected:
            failures += 1
            out.write("MISMATCH\n")
            out.write("  expected: %s\n" % " ".join(expected))
            out.write("  actual:   %s\n" % " ".join(actual))
        if reply["ended"]:
            break
    return 1 if failures else 0
