"""Act taxonomy: force classes, grounding roles, wire round-trip."""

import pytest

from faceted_dialog.semantics import PartialQ, TotalQ, prop
from faceted_dialog.speech_acts import (
    EMPTY_KINDS,
    FORCE_TABLE,
    GROUNDING_SET,
    GROUNDING_TABLE,
    ActKind,
    ForceClass,
    GroundingRole,
    Speaker,
    SpeechAct,
    from_record,
    to_record,
    validate_act,
)


def test_force_table_is_total():
    assert set(FORCE_TABLE) == set(ActKind)
    assert all(isinstance(v, ForceClass) for v in FORCE_TABLE.values())


def test_force_assignments():
    assert FORCE_TABLE[ActKind.INFORM] is ForceClass.INITIATIVE_ASSERTIVE
    assert FORCE_TABLE[ActKind.CONFIRM] is ForceClass.REACTIVE_DIRECTIVE
    assert FORCE_TABLE[ActKind.BYE] is ForceClass.DECLARATIVE
    assert FORCE_TABLE[ActKind.GREET] is ForceClass.DECLARATIVE
    assert FORCE_TABLE[ActKind.INFORM_INTENT] is ForceClass.PROMISSIVE
    for kind in (ActKind.REQUEST_INFO, ActKind.OFFER, ActKind.REQUEST_DIRECTIVE,
                 ActKind.ASK, ActKind.SUGGEST):
        assert FORCE_TABLE[kind] is ForceClass.INITIATIVE_DIRECTIVE
    for kind in (ActKind.ANSWER, ActKind.ACCEPT, ActKind.REFUSE,
                 ActKind.ACKNOWLEDGE, ActKind.WANTS_NOTHING):
        assert FORCE_TABLE[kind] is ForceClass.REACTIVE_ASSERTIVE


def test_grounding_set_exact():
    expected = {
        ActKind.ACCEPT,
        ActKind.ACKNOWLEDGE,
        ActKind.WANTS_NOTHING,
        ActKind.CONFIRM,
        ActKind.REFUSE,
    }
    assert GROUNDING_SET == frozenset(expected)
    assert set(GROUNDING_TABLE) == expected


def test_grounding_polarity():
    assert GROUNDING_TABLE[ActKind.ACCEPT] is GroundingRole.EXPLICIT_POSITIVE
    assert GROUNDING_TABLE[ActKind.ACKNOWLEDGE] is GroundingRole.EXPLICIT_POSITIVE
    assert GROUNDING_TABLE[ActKind.REFUSE] is GroundingRole.EXPLICIT_NEGATIVE
    assert GROUNDING_TABLE[ActKind.WANTS_NOTHING] is GroundingRole.EXPLICIT_NEGATIVE
    assert GROUNDING_TABLE[ActKind.CONFIRM] is GroundingRole.REQUEST


def test_empty_content_kinds():
    assert EMPTY_KINDS == frozenset({ActKind.GREET, ActKind.BYE})
    assert validate_act(SpeechAct(ActKind.GREET)) == []
    assert validate_act(SpeechAct(ActKind.GREET, prop("p"))) != []


def test_validate_act_gates_user_asks():
    assert validate_act(SpeechAct(ActKind.ASK, TotalQ(prop("p")), Speaker.USER)) != []
    assert validate_act(SpeechAct(ActKind.ASK, TotalQ(prop("p")), Speaker.SYSTEM)) == []


def test_wire_round_trip_covers_content_shapes():
    samples = [
        SpeechAct(ActKind.GREET),
        SpeechAct(ActKind.INFORM, prop("nbdocuments", 10)),
        SpeechAct(ActKind.ASK, PartialQ("question", "q")),
        SpeechAct(ActKind.ASK, TotalQ(prop("endOfSearch"))),
        SpeechAct(ActKind.OFFER, prop("metaTerm", "allergology")),
        SpeechAct(ActKind.CONFIRM, prop("subheading", "therapy"), Speaker.SYSTEM),
    ]
    for act in samples:
        record = to_record(act)
        back = from_record(record)
        assert back.kind == act.kind
        assert back.content == act.content
        assert back.speaker == act.speaker
        # records are plain JSON-ready data
        assert isinstance(record["kind"], str)


def test_from_record_rejects_unknown_kind():
    with pytest.raises(ValueError):
        from_record({"kind": "mumble", "content": None, "speaker": "user"})
