"""Plan formalism: item types, guard language, plan definitions, notation.

Plans are small programs the engine advances between turns.  Action
plans (kind A) run for their effects; question plans (kind Q) carry a
goal question they exist to settle.  Guards are deliberately weak:
membership tests against common ground or private belief, variable
binding tests, result-variable tests, counter comparisons, and
conjunction.  Nothing else, so plan behaviour stays auditable.

The textual notation mirrors the item constructors one to one::

    planA(opening, [say(greet), loadPlan(queryAnalysis)]).

A parser for that notation lives at the bottom of the module; parse
errors report line and column.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .semantics import (
    PartialQ,
    Proposition,
    Question,
    SyntaxError_,
    TotalQ,
    is_variable,
    _Scanner,
    _parse_atom,
    _parse_question,
)

Value = str | int


# --------------------------------------------------------------- guards


@dataclass(frozen=True)
class InCom:
    pattern: Proposition


@dataclass(frozen=True)
class NotInCom:
    pattern: Proposition


@dataclass(frozen=True)
class InBel:
    pattern: Proposition


@dataclass(frozen=True)
class NotInBel:
    pattern: Proposition


@dataclass(frozen=True)
class Bound:
    var: str


@dataclass(frozen=True)
class NotBound:
    var: str


@dataclass(frozen=True)
class Success:
    """True when the named result variable is bound to success."""

    var: str


@dataclass(frozen=True)
class NotSuccess:
    """True unless the named result variable is bound to success."""

    var: str


@dataclass(frozen=True)
class Compare:
    """Counter comparison; rhs is an int or a config threshold name."""

    var: str
    op: str  # "lt" or "gt"
    rhs: int | str


@dataclass(frozen=True)
class And:
    parts: tuple["Guard", ...]


Guard = InCom | NotInCom | InBel | NotInBel | Bound | NotBound | Success | NotSuccess | Compare | And

THRESHOLD_NAMES = ("deltaMin", "deltaMax")


# ---------------------------------------------------------------- items


@dataclass(frozen=True)
class Findout:
    """Ask until answered or the retry bound aborts the question."""

    question: Question


@dataclass(frozen=True)
class Raise:
    """Ask once; an unanswered raise is withdrawn, not repeated."""

    question: Question


@dataclass(frozen=True)
class Bind:
    """Open a question silently; volunteered input may settle it."""

    question: Question


@dataclass(frozen=True)
class Assume:
    proposition: Proposition


@dataclass(frozen=True)
class AssumeAction:
    action: str


@dataclass(frozen=True)
class AssumeIssue:
    question: Question


@dataclass(frozen=True)
class ConsultDB:
    """Build the query from common ground, run it, store results in belief."""

    question: Question


class SuggestStyle(Enum):
    # Announce the found item and keep going; silence counts as assent.
    SUGGEST = "suggest"
    # Put the found item on the table and wait for accept or refuse.
    OFFER = "offer"


@dataclass(frozen=True)
class CooperativeSearch:
    """Search candidates with the given property among pool atoms.

    ``pattern`` names what is sought (keyword(k), metaTerm(m), ...),
    ``source`` the pool drawn from common ground and belief, and
    ``result_var`` receives success or failure of the search itself.
    """

    pattern: Proposition
    source: Proposition
    result_var: str
    style: SuggestStyle = SuggestStyle.OFFER


@dataclass(frozen=True)
class CooperativeAction:
    """Invite the user to settle the proposition (an Offer move)."""

    proposition: Proposition


@dataclass(frozen=True)
class Report:
    """Emit an Inform whose content is the tag atom (bindings applied)."""

    payload: Proposition


@dataclass(frozen=True)
class Say:
    kind: str  # act kind name, e.g. "greet"


@dataclass(frozen=True)
class LoadPlan:
    plan_id: str


@dataclass(frozen=True)
class PostCond:
    name: str
    value: Value


@dataclass(frozen=True)
class IfThen:
    guard: Guard
    body: tuple["PlanItem", ...]


@dataclass(frozen=True)
class IfThenElse:
    guard: Guard
    then_body: tuple["PlanItem", ...]
    else_body: tuple["PlanItem", ...]


@dataclass(frozen=True)
class While:
    guard: Guard
    body: tuple["PlanItem", ...]


@dataclass(frozen=True)
class TaskCall:
    """Invoke a named task-side operation; may bind the given variable."""

    name: str
    var: str | None = None


PlanItem = (
    Findout
    | Raise
    | Bind
    | Assume
    | AssumeAction
    | AssumeIssue
    | ConsultDB
    | CooperativeSearch
    | CooperativeAction
    | Report
    | Say
    | LoadPlan
    | PostCond
    | IfThen
    | IfThenElse
    | While
    | TaskCall
)


class PlanKind(Enum):
    ACTION = "planA"
    QUESTION = "planQ"


@dataclass(frozen=True)
class PlanDef:
    id: str
    kind: PlanKind
    body: tuple[PlanItem, ...]
    goal: Question | None = None
    persistent: bool = False

    def __post_init__(self) -> None:
        if self.kind is PlanKind.QUESTION and self.goal is None:
            raise ValueError("question plan %r needs a goal question" % self.id)


def walk_items(items) -> "list[PlanItem]":
    """All items in a body, including those nested under control flow."""
    out: list[PlanItem] = []
    for item in items:
        out.append(item)
        if isinstance(item, (IfThen, While)):
            out.extend(walk_items(item.body))
        elif isinstance(item, IfThenElse):
            out.extend(walk_items(item.then_body))
            out.extend(walk_items(item.else_body))
    return out


def plan_questions(plan: PlanDef) -> list[Question]:
    """Questions a plan may put on the table: its goal plus ask items."""
    questions: list[Question] = []
    if plan.goal is not None:
        questions.append(plan.goal)
    for item in walk_items(plan.body):
        if isinstance(item, (Findout, Raise, Bind)):
            questions.append(item.question)
    return questions


def load_targets(plan: PlanDef) -> list[str]:
    return [i.plan_id for i in walk_items(plan.body) if isinstance(i, LoadPlan)]


def issue_targets(plan: PlanDef) -> list[Question]:
    return [i.question for i in walk_items(plan.body) if isinstance(i, AssumeIssue)]


# ------------------------------------------------------------ activation


@dataclass
class PlanActivation:
    """One run of a plan: remaining program, bindings, bookkeeping.

    Control flow is executed by splicing: an IfThen whose guard holds
    replaces itself with its body; a While whose guard holds replaces
    itself with its body followed by itself.  ``break_scan`` makes the
    engine unwind to the innermost pending While re-entry.
    """

    plan_id: str
    program: list  # PlanItem plus engine-internal loop marks
    bindings: dict[str, Value] = field(default_factory=dict)
    persistent: bool = False
    blocked: bool = False
    # A blocked activation with wait_any resumes on any user turn (asked
    # questions re-check themselves); otherwise it resumes only when
    # wait_issue has left the issue stack (an offer got settled).
    wait_any: bool = True
    wait_issue: object | None = None
    restarts_this_turn: int = 0
    raised_once: set[str] = field(default_factory=set)
    bind_waits: dict[str, int] = field(default_factory=dict)
    break_scan: bool = False

    @property
    def done(self) -> bool:
        return not self.program


# ---------------------------------------------------------- plan syntax


class PlanSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__("%s (line %d, column %d)" % (message, line, column))


_COMMENT_RE = re.compile(r"#[^\n]*")


class _PlanScanner(_Scanner):
    """Adds line/column reporting on top of the atom scanner."""

    def where(self) -> tuple[int, int]:
        upto = self.text[: self.pos]
        line = upto.count("\n") + 1
        column = self.pos - (upto.rfind("\n") + 1) + 1
        return line, column

    def fail(self, message: str) -> "PlanSyntaxError":
        line, column = self.where()
        return PlanSyntaxError(message, line, column)

    def take(self, ch: str) -> None:
        self.skip_ws()
        if self.peek() != ch:
            raise self.fail("expected %r" % ch)
        self.pos += 1

    def try_take(self, ch: str) -> bool:
        self.skip_ws()
        if self.peek() == ch:
            self.pos += 1
            return True
        return False


def _parse_guard(sc: _PlanScanner) -> Guard:
    name = sc.ident()
    if name == "and":
        sc.take("(")
        parts = [_parse_guard(sc)]
        while sc.try_take(","):
            parts.append(_parse_guard(sc))
        sc.take(")")
        return And(tuple(parts))
    sc.take("(")
    if name in ("inCom", "notInCom", "inBel", "notInBel"):
        pattern = _parse_atom(sc)
        sc.take(")")
        cls = {"inCom": InCom, "notInCom": NotInCom, "inBel": InBel, "notInBel": NotInBel}[name]
        return cls(pattern)
    if name in ("bound", "notBound", "success", "notSuccess"):
        var = sc.ident()
        sc.take(")")
        cls = {"bound": Bound, "notBound": NotBound, "success": Success, "notSuccess": NotSuccess}[name]
        return cls(var)
    if name in ("lt", "gt"):
        var = sc.ident()
        sc.take(",")
        sc.skip_ws()
        rhs: int | str
        if sc.peek().isdigit() or sc.peek() == "-":
            rhs = sc.value()  # type: ignore[assignment]
        else:
            rhs = sc.ident()
            if rhs not in THRESHOLD_NAMES:
                raise sc.fail("unknown threshold %r" % rhs)
        sc.take(")")
        return Compare(var, name, rhs)
    raise sc.fail("unknown guard %r" % name)


def _parse_body(sc: _PlanScanner) -> tuple[PlanItem, ...]:
    sc.take("[")
    items: list[PlanItem] = []
    sc.skip_ws()
    if sc.peek() != "]":
        items.append(_parse_item(sc))
        while sc.try_take(","):
            items.append(_parse_item(sc))
    sc.take("]")
    return tuple(items)


def _parse_item(sc: _PlanScanner) -> PlanItem:
    sc.skip_ws()
    name = sc.ident()
    if name == "findout":
        sc.take("(")
        q = _parse_question(sc)
        sc.take(")")
        return Findout(q)
    if name == "raise":
        sc.take("(")
        q = _parse_question(sc)
        sc.take(")")
        return Raise(q)
    if name == "bind":
        sc.take("(")
        q = _parse_question(sc)
        sc.take(")")
        return Bind(q)
    if name == "assume":
        sc.take("(")
        p = _parse_atom(sc)
        sc.take(")")
        return Assume(p)
    if name == "assumeAction":
        sc.take("(")
        action = sc.ident()
        sc.take(")")
        return AssumeAction(action)
    if name == "assumeIssue":
        sc.take("(")
        q = _parse_question(sc)
        sc.take(")")
        return AssumeIssue(q)
    if name == "consultDB":
        sc.take("(")
        q = _parse_question(sc)
        sc.take(")")
        return ConsultDB(q)
    if name == "cooperativeSearch":
        sc.take("(")
        pattern = _parse_atom(sc)
        sc.take(",")
        source = _parse_atom(sc)
        sc.take(",")
        result_var = sc.ident()
        sc.take(",")
        style = sc.ident()
        if style not in ("suggest", "offer"):
            raise sc.fail("cooperativeSearch style must be suggest or offer")
        sc.take(")")
        return CooperativeSearch(pattern, source, result_var, SuggestStyle(style))
    if name == "cooperativeAction":
        sc.take("(")
        p = _parse_atom(sc)
        sc.take(")")
        return CooperativeAction(p)
    if name == "report":
        sc.take("(")
        payload = _parse_atom(sc)
        sc.take(")")
        return Report(payload)
    if name == "say":
        sc.take("(")
        kind = sc.ident()
        sc.take(")")
        return Say(kind)
    if name == "loadPlan":
        sc.take("(")
        target = sc.ident()
        sc.take(")")
        return LoadPlan(target)
    if name == "postCond":
        sc.take("(")
        pname = sc.ident()
        sc.take(",")
        value = sc.value()
        sc.take(")")
        return PostCond(pname, value)
    if name == "ifThen":
        sc.take("(")
        guard = _parse_guard(sc)
        sc.take(",")
        body = _parse_body(sc)
        sc.take(")")
        return IfThen(guard, body)
    if name == "ifThenElse":
        sc.take("(")
        guard = _parse_guard(sc)
        sc.take(",")
        then_body = _parse_body(sc)
        sc.take(",")
        else_body = _parse_body(sc)
        sc.take(")")
        return IfThenElse(guard, then_body, else_body)
    if name == "while":
        sc.take("(")
        guard = _parse_guard(sc)
        sc.take(",")
        body = _parse_body(sc)
        sc.take(")")
        return While(guard, body)
    if name == "taskCall":
        sc.take("(")
        cname = sc.ident()
        var = None
        if sc.try_take(","):
            var = sc.ident()
        sc.take(")")
        return TaskCall(cname, var)
    raise sc.fail("unknown plan item %r" % name)


def parse_plans(text: str) -> dict[str, PlanDef]:
    """Parse a plan file: one ``planA(...)`` / ``planQ(...)`` per block."""
    cleaned = _COMMENT_RE.sub(lambda m: " " * len(m.group(0)), text)
    sc = _PlanScanner(cleaned)
    plans: dict[str, PlanDef] = {}
    while True:
        sc.skip_ws()
        if sc.pos >= len(cleaned):
            break
        head = sc.ident()
        if head not in ("planA", "planQ"):
            raise sc.fail("expected planA or planQ, got %r" % head)
        sc.take("(")
        plan_id = sc.ident()
        goal: Question | None = None
        persistent = False
        sc.take(",")
        sc.skip_ws()
        if head == "planQ":
            goal = _parse_question(sc)
            sc.take(",")
            sc.skip_ws()
        if sc.peek() != "[":
            flag = sc.ident()
            if flag != "persistent":
                raise sc.fail("expected body or 'persistent', got %r" % flag)
            persistent = True
            sc.take(",")
        body = _parse_body(sc)
        sc.take(")")
        sc.take(".")
        if plan_id in plans:
            raise sc.fail("duplicate plan id %r" % plan_id)
        kind = PlanKind.ACTION if head == "planA" else PlanKind.QUESTION
        plans[plan_id] = PlanDef(plan_id, kind, body, goal, persistent)
    if not plans:
        raise PlanSyntaxError("no plans found", 1, 1)
    return plans


def format_plan(plan: PlanDef) -> str:
    """Round-trippable rendering of a plan definition."""

    def guard_text(g: Guard) -> str:
        if isinstance(g, And):
            return "and(%s)" % ", ".join(guard_text(p) for p in g.parts)
        if isinstance(g, (InCom, NotInCom, InBel, NotInBel)):
            name = {InCom: "inCom", NotInCom: "notInCom", InBel: "inBel", NotInBel: "notInBel"}[type(g)]
            return "%s(%s)" % (name, g.pattern)
        if isinstance(g, (Bound, NotBound, Success, NotSuccess)):
            name = {Bound: "bound", NotBound: "notBound", Success: "success", NotSuccess: "notSuccess"}[type(g)]
            return "%s(%s)" % (name, g.var)
        return "%s(%s, %s)" % (g.op, g.var, g.rhs)

    def item_text(item: PlanItem) -> str:
        if isinstance(item, Findout):
            return "findout(%s)" % item.question
        if isinstance(item, Raise):
            return "raise(%s)" % item.question
        if isinstance(item, Bind):
            return "bind(%s)" % item.question
        if isinstance(item, Assume):
            return "assume(%s)" % item.proposition
        if isinstance(item, AssumeAction):
            return "assumeAction(%s)" % item.action
        if isinstance(item, AssumeIssue):
            return "assumeIssue(%s)" % item.question
        if isinstance(item, ConsultDB):
            return "consultDB(%s)" % item.question
        if isinstance(item, CooperativeSearch):
            return "cooperativeSearch(%s, %s, %s, %s)" % (
                item.pattern,
                item.source,
                item.result_var,
                item.style.value,
            )
        if isinstance(item, CooperativeAction):
            return "cooperativeAction(%s)" % item.proposition
        if isinstance(item, Report):
            return "report(%s)" % item.payload
        if isinstance(item, Say):
            return "say(%s)" % item.kind
        if isinstance(item, LoadPlan):
            return "loadPlan(%s)" % item.plan_id
        if isinstance(item, PostCond):
            return "postCond(%s, %s)" % (item.name, item.value)
        if isinstance(item, IfThen):
            return "ifThen(%s, %s)" % (guard_text(item.guard), body_text(item.body))
        if isinstance(item, IfThenElse):
            return "ifThenElse(%s, %s, %s)" % (
                guard_text(item.guard),
                body_text(item.then_body),
                body_text(item.else_body),
            )
        if isinstance(item, While):
            return "while(%s, %s)" % (guard_text(item.guard), body_text(item.body))
        if isinstance(item, TaskCall):
            if item.var is None:
                return "taskCall(%s)" % item.name
            return "taskCall(%s, %s)" % (item.name, item.var)
        raise TypeError("unknown item %r" % (item,))

    def body_text(body) -> str:
        return "[%s]" % ", ".join(item_text(i) for i in body)

    head = plan.kind.value
    parts = [plan.id]
    if plan.goal is not None:
        parts.append(str(plan.goal))
    if plan.persistent:
        parts.append("persistent")
    parts.append(body_text(plan.body))
    return "%s(%s)." % (head, ", ".join(parts))
