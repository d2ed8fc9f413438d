"""Built-in plan library: loading, lookup, and static diagnostics.

The shipped plans live in ``data/library.plans`` in the textual plan
notation.  ``validate_library`` runs static checks that catch the
mistakes plan authors actually make: dangling loadPlan targets, loops
that can never block or change state, search items with patterns the
task layer does not know, and task calls nothing implements.
"""

from __future__ import annotations

from importlib import resources

from .plans import (
    Bind,
    CooperativeSearch,
    Findout,
    LoadPlan,
    PlanDef,
    PlanKind,
    Raise,
    Report,
    Say,
    TaskCall,
    While,
    parse_plans,
    plan_questions,
    issue_targets,
    load_targets,
    walk_items,
)

# Search patterns the engine can dispatch; "broaden" proposes query
# expansions, the others go through the terminology suggester.
KNOWN_SEARCH_PATTERNS = (
    "keyword",
    "metaTerm",
    "subheading",
    "specificTerm",
    "interesting",
    "broaden",
)

KNOWN_TASK_CALLS = (
    "countDocuments",
    "discardTerms",
    "discardQuery",
    "discardRequest",
    "memberNext",
    "lookupDefinition",
)

ROOT_PLAN = "opening"


def builtin_plan_path() -> str:
    return str(resources.files("faceted_dialog") / "data" / "library.plans")


def load_builtin_plans() -> dict[str, PlanDef]:
    with open(builtin_plan_path(), "r", encoding="utf-8") as fh:
        return parse_plans(fh.read())


def load_plan_file(path: str) -> dict[str, PlanDef]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_plans(fh.read())


def validate_library(plans: dict[str, PlanDef]) -> list[str]:
    """Static diagnostics over a plan set; empty means clean."""
    problems: list[str] = []

    for plan in plans.values():
        for target in load_targets(plan):
            if target not in plans:
                problems.append(
                    "%s: loadPlan target %r is not defined" % (plan.id, target)
                )
        for item in walk_items(plan.body):
            if isinstance(item, While):
                if not any(
                    not isinstance(sub, (Say, Report))
                    for sub in walk_items(item.body)
                ):
                    problems.append(
                        "%s: while body only says and reports; it can never "
                        "block or change state" % plan.id
                    )
            if isinstance(item, CooperativeSearch):
                if item.pattern.predicate not in KNOWN_SEARCH_PATTERNS:
                    problems.append(
                        "%s: cooperativeSearch pattern %r is not dispatchable"
                        % (plan.id, item.pattern.predicate)
                    )
            if isinstance(item, TaskCall):
                if item.name not in KNOWN_TASK_CALLS:
                    problems.append(
                        "%s: taskCall %r has no implementation" % (plan.id, item.name)
                    )

    if ROOT_PLAN in plans:
        reachable = reachable_plans(ROOT_PLAN, plans)
        for plan_id in plans:
            if plan_id not in reachable:
                problems.append("%s: unreachable from %s" % (plan_id, ROOT_PLAN))

    return problems


def reachable_plans(root: str, plans: dict[str, PlanDef]) -> set[str]:
    """Plans reachable via loadPlan edges plus issue-driven loading:
    raising a question whose goal some question plan carries loads it."""
    goal_index = {
        plan.goal: plan.id
        for plan in plans.values()
        if plan.kind is PlanKind.QUESTION and plan.goal is not None
    }
    seen: set[str] = set()
    stack = [root]
    while stack:
        current = stack.pop()
        if current in seen or current not in plans:
            continue
        seen.add(current)
        plan = plans[current]
        stack.extend(load_targets(plan))
        for q in issue_targets(plan):
            if q in goal_index:
                stack.append(goal_index[q])
        # A plan that opens a question with findout/raise/bind can pull
        # in the question plan holding that goal once it goes unanswered.
        for item in walk_items(plan.body):
            if isinstance(item, (Findout, Raise, Bind)) and item.question in goal_index:
                stack.append(goal_index[item.question])
    return seen


def library_questions(plans: dict[str, PlanDef]):
    """Every question any plan may raise, keyed by plan id."""
    return {plan_id: plan_questions(plan) for plan_id, plan in plans.items()}
