"""Question and answer algebra underlying the dialog engine.

Content is predicate-logic flavoured: ground atoms such as
``keyword(asthma)`` or ``nbdocuments(12)``, questions built with a
``?`` operator (total ``?p``, partial ``?p(x)``, and choice
``?set(p1, p2, ...)``), and answers that are polar, ground instances,
or unknown.  The central relation is :func:`resolves`, which decides
whether an answer settles a question; :func:`relevant` is the weaker
gate used when integrating partial information.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

Value = str | int

# Plan variables are single lowercase letters, optionally suffixed with
# digits (t, m, q, r2, ...).  Every other symbol is a constant.
_VAR_RE = re.compile(r"^[a-z][0-9]*$")

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def is_variable(token: Value) -> bool:
    return isinstance(token, str) and bool(_VAR_RE.match(token))


# ---------------------------------------------------------------- atoms


@dataclass(frozen=True)
class Proposition:
    """An atom: predicate name plus constant or variable arguments.

    Atoms stored in belief or common ground must be ground; atoms with
    variables act as patterns inside plans and guards.
    """

    predicate: str
    args: tuple[Value, ...] = ()

    def is_ground(self) -> bool:
        return not any(is_variable(a) for a in self.args)

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return "%s(%s)" % (self.predicate, ", ".join(str(a) for a in self.args))


def prop(predicate: str, *args: Value) -> Proposition:
    return Proposition(predicate, tuple(args))


def substitute_args(p: Proposition, binding: dict[str, Value]) -> Proposition:
    """Replace variable arguments that have a binding; leave the rest."""
    if p.is_ground():
        return p
    new_args = tuple(
        binding.get(a, a) if is_variable(a) else a for a in p.args
    )
    return Proposition(p.predicate, new_args)


def match_atom(pattern: Proposition, fact: Proposition) -> dict[str, Value] | None:
    """Unify a pattern atom against a ground fact.

    Returns the variable binding on success, None on mismatch.  Repeated
    variables must unify to the same constant.
    """
    if pattern.predicate != fact.predicate or len(pattern.args) != len(fact.args):
        return None
    binding: dict[str, Value] = {}
    for pa, fa in zip(pattern.args, fact.args):
        if is_variable(pa):
            if pa in binding and binding[pa] != fa:
                return None
            binding[str(pa)] = fa
        elif pa != fa:
            return None
    return binding


# ------------------------------------------------------------- questions


@dataclass(frozen=True)
class TotalQ:
    """Polar question ?p over a ground atom."""

    proposition: Proposition

    def __str__(self) -> str:
        return "?%s" % self.proposition


@dataclass(frozen=True)
class PartialQ:
    """Open question ?p(x): which instance of the predicate holds."""

    predicate: str
    var: str = "x"

    def __str__(self) -> str:
        return "?%s(%s)" % (self.predicate, self.var)


@dataclass(frozen=True)
class ChoiceQ:
    """Alternative question ?set(...): settle exactly one alternative."""

    alternatives: tuple["TotalQ | PartialQ", ...]

    def __post_init__(self) -> None:
        if len(self.alternatives) < 2:
            raise ValueError("a choice question needs at least two alternatives")

    def __str__(self) -> str:
        inner = ", ".join(str(a)[1:] for a in self.alternatives)
        return "?set(%s)" % inner


Question = TotalQ | PartialQ | ChoiceQ


# --------------------------------------------------------------- answers


@dataclass(frozen=True)
class Yes:
    def __str__(self) -> str:
        return "yes"


@dataclass(frozen=True)
class No:
    def __str__(self) -> str:
        return "no"


@dataclass(frozen=True)
class Unknown:
    def __str__(self) -> str:
        return "unknown"


@dataclass(frozen=True)
class Instance:
    """A ground atom offered as an answer."""

    proposition: Proposition

    def __str__(self) -> str:
        return str(self.proposition)


Answer = Yes | No | Unknown | Instance

YES = Yes()
NO = No()
UNKNOWN = Unknown()


# -------------------------------------------------------------- relations


def resolves(answer: Answer, question: Question) -> bool:
    """Does the answer settle the question?

    Total questions are settled by yes, no, or an instance of the exact
    atom (which counts as yes).  Partial questions are settled by any
    ground instance of their predicate.  Choice questions are settled by
    an answer that resolves exactly one alternative.  Unknown settles
    nothing.
    """
    if isinstance(answer, Unknown):
        return False
    if isinstance(question, TotalQ):
        if isinstance(answer, (Yes, No)):
            return True
        return answer.proposition == question.proposition
    if isinstance(question, PartialQ):
        if isinstance(answer, Instance):
            return answer.proposition.predicate == question.predicate
        return False
    if isinstance(question, ChoiceQ):
        hits = sum(1 for alt in question.alternatives if resolves(answer, alt))
        return hits == 1
    raise TypeError("not a question: %r" % (question,))


def question_predicates(question: Question) -> frozenset[str]:
    if isinstance(question, TotalQ):
        return frozenset({question.proposition.predicate})
    if isinstance(question, PartialQ):
        return frozenset({question.predicate})
    preds: set[str] = set()
    for alt in question.alternatives:
        preds |= question_predicates(alt)
    return frozenset(preds)


def relevant(answer: Answer, question: Question) -> bool:
    """Weaker gate than resolves: does the answer engage the question?

    Polar answers engage any question under discussion (a refusal to an
    open question is relevant without resolving it); instances are
    relevant when they mention one of the question's predicates.
    """
    if isinstance(answer, Unknown):
        return False
    if isinstance(answer, (Yes, No)):
        return True
    return answer.proposition.predicate in question_predicates(question)


def substitute(question: PartialQ, binding: dict[str, Value]) -> Proposition:
    """Instantiate a partial question with a binding for its variable."""
    if not isinstance(question, PartialQ):
        raise TypeError("substitute applies to partial questions only")
    if question.var not in binding:
        raise KeyError("no binding for %s" % question.var)
    return Proposition(question.predicate, (binding[question.var],))


def resolving_binding(question: Question, fact: Proposition) -> dict[str, Value] | None:
    """If the ground fact resolves the question, return the induced binding.

    A partial question ?p(x) resolved by p(c) binds x to c (first
    argument).  Total and choice questions yield an empty binding.
    """
    if not resolves(Instance(fact), question):
        return None
    if isinstance(question, PartialQ) and fact.args:
        return {question.var: fact.args[0]}
    if isinstance(question, ChoiceQ):
        for alt in question.alternatives:
            if isinstance(alt, PartialQ) and resolves(Instance(fact), alt) and fact.args:
                return {alt.var: fact.args[0]}
    return {}


def find_resolving_fact(question: Question, facts) -> Proposition | None:
    """First fact (in sorted text order, for determinism) resolving the question."""
    for fact in sorted(facts, key=str):
        if resolves(Instance(fact), question):
            return fact
    return None


# ---------------------------------------------------------------- syntax
#
# Textual form used by the plan notation, transcripts, and the wire
# protocol:  atoms  p, p(a, b), nbdocuments(42);  questions  ?p, ?p(x),
# ?set(p1(x), p2).


class SyntaxError_(ValueError):
    """Parse failure in the content syntax; carries position info."""

    def __init__(self, message: str, text: str, pos: int):
        self.pos = pos
        super().__init__("%s at position %d in %r" % (message, pos, text))


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        self.skip_ws()
        if self.peek() != ch:
            raise SyntaxError_("expected %r" % ch, self.text, self.pos)
        self.pos += 1

    def ident(self) -> str:
        self.skip_ws()
        start = self.pos
        # identifiers never start with a digit; numbers go through value()
        if self.peek().isdigit():
            raise SyntaxError_("expected identifier", self.text, self.pos)
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] == "_"
        ):
            self.pos += 1
        if self.pos == start:
            raise SyntaxError_("expected identifier", self.text, self.pos)
        return self.text[start : self.pos]

    def value(self) -> Value:
        self.skip_ws()
        start = self.pos
        if self.peek() == "-" or self.peek().isdigit():
            self.pos += 1
            while self.peek().isdigit():
                self.pos += 1
            return int(self.text[start : self.pos])
        return self.ident()


def _parse_atom(sc: _Scanner) -> Proposition:
    name = sc.ident()
    args: list[Value] = []
    sc.skip_ws()
    if sc.peek() == "(":
        sc.expect("(")
        sc.skip_ws()
        if sc.peek() != ")":
            while True:
                args.append(sc.value())
                sc.skip_ws()
                if sc.peek() == ",":
                    sc.expect(",")
                else:
                    break
        sc.expect(")")
    return Proposition(name, tuple(args))


def _question_over(atom: Proposition) -> TotalQ | PartialQ:
    if len(atom.args) == 1 and is_variable(atom.args[0]):
        return PartialQ(atom.predicate, str(atom.args[0]))
    return TotalQ(atom)


def _parse_question(sc: _Scanner) -> Question:
    sc.expect("?")
    sc.skip_ws()
    save = sc.pos
    name = sc.ident()
    if name == "set":
        sc.expect("(")
        alts: list[TotalQ | PartialQ] = []
        while True:
            alts.append(_question_over(_parse_atom(sc)))
            sc.skip_ws()
            if sc.peek() == ",":
                sc.expect(",")
            else:
                break
        sc.expect(")")
        return ChoiceQ(tuple(alts))
    sc.pos = save
    return _question_over(_parse_atom(sc))


def parse_atom(text: str) -> Proposition:
    sc = _Scanner(text)
    atom = _parse_atom(sc)
    sc.skip_ws()
    if sc.pos != len(text):
        raise SyntaxError_("trailing input", text, sc.pos)
    return atom


def parse_question(text: str) -> Question:
    sc = _Scanner(text)
    q = _parse_question(sc)
    sc.skip_ws()
    if sc.pos != len(text):
        raise SyntaxError_("trailing input", text, sc.pos)
    return q


def parse_content(text: str):
    """Parse either a question (leading '?') or a ground atom."""
    stripped = text.strip()
    if stripped.startswith("?"):
        return parse_question(stripped)
    return parse_atom(stripped)


def format_content(content) -> str:
    return str(content)
