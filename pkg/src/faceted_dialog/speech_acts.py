"""Speech act taxonomy: act kinds, illocutionary force, grounding roles.

Fifteen act kinds cover what users and the system exchange: assertions,
requests, proposals, responses, conversational rituals, and the system's
own question and suggestion moves.  Each kind maps to exactly one
illocutionary force class; a subset of kinds double as grounding acts
(they signal how the previous utterance was taken up).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from . import semantics
from .semantics import Answer, Instance, No, Proposition, Question, Unknown, Yes


class ActKind(Enum):
    INFORM = "inform"
    REQUEST_INFO = "request_info"
    OFFER = "offer"
    REQUEST_DIRECTIVE = "request_directive"
    ANSWER = "answer"
    ACCEPT = "accept"
    REFUSE = "refuse"
    ACKNOWLEDGE = "acknowledge"
    WANTS_NOTHING = "wants_nothing"
    CONFIRM = "confirm"
    BYE = "bye"
    GREET = "greet"
    INFORM_INTENT = "inform_intent"
    ASK = "ask"
    SUGGEST = "suggest"


class ForceClass(Enum):
    INITIATIVE_ASSERTIVE = "initiative_assertive"
    INITIATIVE_DIRECTIVE = "initiative_directive"
    REACTIVE_ASSERTIVE = "reactive_assertive"
    REACTIVE_DIRECTIVE = "reactive_directive"
    DECLARATIVE = "declarative"
    PROMISSIVE = "promissive"


class GroundingRole(Enum):
    EXPLICIT_POSITIVE = "explicit_positive"
    EXPLICIT_NEGATIVE = "explicit_negative"
    REQUEST = "request"
    NONE = "none"


class Speaker(Enum):
    USER = "user"
    SYSTEM = "system"


# Total map: every act kind has exactly one force class.
FORCE_TABLE: dict[ActKind, ForceClass] = {
    ActKind.INFORM: ForceClass.INITIATIVE_ASSERTIVE,
    ActKind.REQUEST_INFO: ForceClass.INITIATIVE_DIRECTIVE,
    ActKind.OFFER: ForceClass.INITIATIVE_DIRECTIVE,
    ActKind.REQUEST_DIRECTIVE: ForceClass.INITIATIVE_DIRECTIVE,
    ActKind.ASK: ForceClass.INITIATIVE_DIRECTIVE,
    ActKind.SUGGEST: ForceClass.INITIATIVE_DIRECTIVE,
    ActKind.ANSWER: ForceClass.REACTIVE_ASSERTIVE,
    ActKind.ACCEPT: ForceClass.REACTIVE_ASSERTIVE,
    ActKind.REFUSE: ForceClass.REACTIVE_ASSERTIVE,
    ActKind.ACKNOWLEDGE: ForceClass.REACTIVE_ASSERTIVE,
    ActKind.WANTS_NOTHING: ForceClass.REACTIVE_ASSERTIVE,
    ActKind.CONFIRM: ForceClass.REACTIVE_DIRECTIVE,
    ActKind.BYE: ForceClass.DECLARATIVE,
    ActKind.GREET: ForceClass.DECLARATIVE,
    ActKind.INFORM_INTENT: ForceClass.PROMISSIVE,
}

# Acts that, besides their main force, ground the previous utterance.
GROUNDING_TABLE: dict[ActKind, GroundingRole] = {
    ActKind.ACCEPT: GroundingRole.EXPLICIT_POSITIVE,
    ActKind.ACKNOWLEDGE: GroundingRole.EXPLICIT_POSITIVE,
    ActKind.WANTS_NOTHING: GroundingRole.EXPLICIT_NEGATIVE,
    ActKind.REFUSE: GroundingRole.EXPLICIT_NEGATIVE,
    ActKind.CONFIRM: GroundingRole.REQUEST,
}

GROUNDING_SET = frozenset(GROUNDING_TABLE)


def classify_force(kind: ActKind) -> ForceClass:
    return FORCE_TABLE[kind]


def grounding_role(kind: ActKind) -> GroundingRole:
    return GROUNDING_TABLE.get(kind, GroundingRole.NONE)


# ---------------------------------------------------------------- acts

Content = Proposition | Question | Answer | None


@dataclass(frozen=True)
class SpeechAct:
    """One dialog move: kind, optional semantic payload, speaker, surface."""

    kind: ActKind
    content: Content = None
    speaker: Speaker = Speaker.SYSTEM
    surface: str | None = None

    def __str__(self) -> str:
        who = "U" if self.speaker is Speaker.USER else "S"
        if self.content is None:
            return "%s:%s" % (who, self.kind.value)
        return "%s:%s[%s]" % (who, self.kind.value, self.content)


# Kinds that never carry content.
EMPTY_KINDS = frozenset({ActKind.GREET, ActKind.BYE})

# Response kinds that either carry content or lean on the question under
# discussion at integration time.
RESPONSE_KINDS = frozenset(
    {ActKind.ANSWER, ActKind.ACCEPT, ActKind.REFUSE, ActKind.CONFIRM}
)


def validate_act(act: SpeechAct, qud: Question | None = None) -> list[str]:
    """Structural checks on a single act; returns human-readable problems."""
    problems: list[str] = []
    if act.kind in EMPTY_KINDS and act.content is not None:
        problems.append("%s must not carry content" % act.kind.value)
    if act.kind in RESPONSE_KINDS and act.content is None and qud is None:
        problems.append(
            "%s needs content or a question under discussion" % act.kind.value
        )
    if act.kind is ActKind.ASK and act.speaker is Speaker.USER:
        problems.append("ask is a system move; user questions arrive as request_info")
    if act.kind is ActKind.ASK and not isinstance(
        act.content, (semantics.TotalQ, semantics.PartialQ, semantics.ChoiceQ)
    ):
        problems.append("ask must carry a question")
    return problems


# ---------------------------------------------------------- serialization


def _content_record(content: Content):
    if content is None:
        return None
    if isinstance(content, Proposition):
        return {"type": "prop", "value": str(content)}
    if isinstance(content, (Yes, No, Unknown)):
        return {"type": "polarity", "value": str(content)}
    if isinstance(content, Instance):
        return {"type": "instance", "value": str(content.proposition)}
    return {"type": "question", "value": str(content)}


def _content_from_record(record) -> Content:
    if record is None:
        return None
    kind, value = record["type"], record["value"]
    if kind == "prop":
        return semantics.parse_atom(value)
    if kind == "question":
        return semantics.parse_question(value)
    if kind == "instance":
        return Instance(semantics.parse_atom(value))
    if kind == "polarity":
        return {"yes": semantics.YES, "no": semantics.NO, "unknown": semantics.UNKNOWN}[value]
    raise ValueError("unknown content record type %r" % kind)


def to_record(act: SpeechAct) -> dict:
    return {
        "kind": act.kind.value,
        "speaker": act.speaker.value,
        "content": _content_record(act.content),
        "surface": act.surface,
    }


def from_record(record: dict) -> SpeechAct:
    return SpeechAct(
        kind=ActKind(record["kind"]),
        speaker=Speaker(record["speaker"]),
        content=_content_from_record(record.get("content")),
        surface=record.get("surface"),
    )
