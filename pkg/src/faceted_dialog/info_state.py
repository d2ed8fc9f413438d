"""The two-part information state and its primitive operations.

The private half holds what only the system knows: its agenda, beliefs,
plan stack and queued moves.  The public half holds what the dialog has
established: the common ground, the stack of open issues, the question
under discussion (always the top of that stack) and the action in
progress.  All rule effects in the engine go through the primitive
operations here so every mutation is auditable; ``check_well_formed``
re-asserts the structural invariants after each rule application.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .plans import PlanActivation, PlanItem
from .semantics import Instance, Proposition, Question, resolves
from .speech_acts import Speaker, SpeechAct


class EngineError(RuntimeError):
    """Internal invariant broken; indicates a bug, not bad user input."""


class AgendaOrigin(Enum):
    PLAN = "plan"
    ACCOMMODATION = "accommodation"
    STRATEGY = "strategy"


@dataclass
class AgendaItem:
    item: PlanItem
    origin: AgendaOrigin


@dataclass
class PrivateIS:
    agenda: list[AgendaItem] = field(default_factory=list)
    bel: set[Proposition] = field(default_factory=set)
    plan: list[PlanActivation] = field(default_factory=list)
    nextmove: deque[SpeechAct] = field(default_factory=deque)


@dataclass
class PublicIS:
    com: set[Proposition] = field(default_factory=set)
    issue: list[Question] = field(default_factory=list)
    qud: Question | None = None
    action: str | None = None


@dataclass
class InformationState:
    private: PrivateIS = field(default_factory=PrivateIS)
    public: PublicIS = field(default_factory=PublicIS)
    turn: Speaker = Speaker.SYSTEM
    abort_counters: dict[Question, int] = field(default_factory=dict)
    # Grounding order of com facts; query assembly pairs a subheading
    # with the most recently grounded keyword, which a set cannot tell.
    ground_log: list[Proposition] = field(default_factory=list)
    # Set once the closing ritual has run; step() stops doing work then.
    ended: bool = False

    # ------------------------------------------------------ issue stack

    def _sync_qud(self) -> None:
        self.public.qud = self.public.issue[-1] if self.public.issue else None

    def push_issue(self, question: Question) -> None:
        """Raise a question; re-raising moves it back to the top."""
        if question in self.public.issue:
            if self.public.issue[-1] == question:
                self._sync_qud()
                return
            self.public.issue.remove(question)
        self.public.issue.append(question)
        self._sync_qud()

    def retract_issue(self, question: Question) -> None:
        if question in self.public.issue:
            self.public.issue.remove(question)
        self._sync_qud()

    # ---------------------------------------------------- common ground

    def ground(self, proposition: Proposition) -> None:
        """Establish a fact publicly; resolved issues fall off the stack."""
        if not proposition.is_ground():
            raise EngineError("cannot ground non-ground atom %s" % proposition)
        if proposition not in self.public.com:
            self.ground_log.append(proposition)
        self.public.com.add(proposition)
        self.private.bel.add(proposition)
        answer = Instance(proposition)
        self.public.issue = [q for q in self.public.issue if not resolves(answer, q)]
        self._sync_qud()

    def retract_com(self, proposition: Proposition) -> None:
        """Cleanup-only escape hatch: drop a stale fact from both stores."""
        self.public.com.discard(proposition)
        self.private.bel.discard(proposition)
        if proposition in self.ground_log:
            self.ground_log.remove(proposition)

    def retract_where(self, predicate: str) -> list[Proposition]:
        """Drop every fact with the given predicate; returns what went."""
        victims = [p for p in self.private.bel | self.public.com if p.predicate == predicate]
        for p in victims:
            self.retract_com(p)
        return victims

    # ----------------------------------------------------------- belief

    def add_bel(self, proposition: Proposition) -> None:
        if not proposition.is_ground():
            raise EngineError("cannot believe non-ground atom %s" % proposition)
        self.private.bel.add(proposition)

    def bel_with(self, predicate: str) -> list[Proposition]:
        return sorted(
            (p for p in self.private.bel if p.predicate == predicate), key=str
        )

    def com_with(self, predicate: str) -> list[Proposition]:
        return sorted(
            (p for p in self.public.com if p.predicate == predicate), key=str
        )

    # ----------------------------------------------------------- agenda

    def push_agenda(self, item: PlanItem, origin: AgendaOrigin) -> None:
        self.private.agenda.append(AgendaItem(item, origin))

    def pop_agenda(self) -> AgendaItem:
        if not self.private.agenda:
            raise EngineError("pop on empty agenda")
        return self.private.agenda.pop()

    # ------------------------------------------------------------ moves

    def enqueue_move(self, act: SpeechAct) -> None:
        self.private.nextmove.append(act)

    def drain_moves(self) -> list[SpeechAct]:
        moves = list(self.private.nextmove)
        self.private.nextmove.clear()
        return moves

    # ------------------------------------------------------- plan stack

    def push_plan(self, activation: PlanActivation) -> None:
        self.private.plan.append(activation)

    def top_plan(self) -> PlanActivation | None:
        return self.private.plan[-1] if self.private.plan else None

    def active_plan_ids(self) -> list[str]:
        return [a.plan_id for a in self.private.plan]


def new_state() -> InformationState:
    return InformationState()


def check_well_formed(state: InformationState) -> list[str]:
    """Structural invariants; an empty list means the state is sound."""
    problems: list[str] = []
    expected_qud = state.public.issue[-1] if state.public.issue else None
    if state.public.qud != expected_qud:
        problems.append(
            "qud %s is not the top of the issue stack" % (state.public.qud,)
        )
    stray = state.public.com - state.private.bel
    if stray:
        problems.append(
            "com not contained in bel: %s" % ", ".join(sorted(str(p) for p in stray))
        )
    for entry in state.private.agenda:
        if not isinstance(entry.origin, AgendaOrigin):
            problems.append("agenda item %r has no valid origin" % (entry.item,))
    for p in state.public.com:
        if not p.is_ground():
            problems.append("non-ground atom in com: %s" % p)
    for p in state.private.bel:
        if not p.is_ground():
            problems.append("non-ground atom in bel: %s" % p)
    seen: set[Question] = set()
    for q in state.public.issue:
        if q in seen:
            problems.append("duplicate issue entry %s" % q)
        seen.add(q)
    return problems
