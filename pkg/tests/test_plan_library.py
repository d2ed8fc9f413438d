"""Built-in plan library: parses clean, validates clean, right shapes."""

import pytest

from faceted_dialog.plan_library import (
    load_builtin_plans,
    load_plan_file,
    reachable_plans,
    validate_library,
)
from faceted_dialog.plans import LoadPlan, PlanSyntaxError, Say, parse_plans
from faceted_dialog.semantics import PartialQ
from faceted_dialog.speech_acts import ActKind


@pytest.fixture(scope="module")
def plans():
    return load_builtin_plans()


def test_library_loads_eight_plans_with_zero_diagnostics(plans):
    assert len(plans) == 8
    assert validate_library(plans) == []


def test_expected_plan_names(plans):
    assert set(plans) == {
        "opening",
        "queryAnalysis",
        "documentSearch",
        "queryBuilding",
        "listEvaluation",
        "documentDescription",
        "definitionSearch",
        "explanationSearch",
    }


def test_opening_body_is_greet_then_query_analysis(plans):
    body = plans["opening"].body
    assert len(body) == 2
    assert isinstance(body[0], Say) and ActKind(body[0].kind) is ActKind.GREET
    assert isinstance(body[1], LoadPlan) and body[1].plan_id == "queryAnalysis"


def test_document_search_is_persistent_and_others_are_not(plans):
    assert plans["documentSearch"].persistent
    assert not plans["opening"].persistent
    assert not plans["queryBuilding"].persistent


def test_question_plans_carry_goals(plans):
    assert plans["queryAnalysis"].goal == PartialQ("question", "q")
    assert plans["definitionSearch"].goal == PartialQ("define", "w")
    assert plans["documentDescription"].goal == PartialQ("interesting", "x")
    assert plans["opening"].goal is None


def test_every_plan_reachable_from_opening(plans):
    assert reachable_plans("opening", plans) == set(plans)


def test_validate_flags_dangling_load(tmp_path):
    bad = tmp_path / "bad.plans"
    bad.write_text("planA(opening, [say(greet), loadPlan(missing)]).\n")
    problems = validate_library(load_plan_file(str(bad)))
    assert any("missing" in p for p in problems)


def test_parse_error_reports_position():
    with pytest.raises(PlanSyntaxError) as err:
        parse_plans("planA(opening, [say(greet)")
    assert "line" in str(err.value)
