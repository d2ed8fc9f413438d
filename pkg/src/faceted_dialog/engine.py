"""The dialog engine: integrate, accommodate, advance, generate.

One call to :meth:`DialogEngine.step` is one system turn.  It first
integrates the user's acts into the information state (answers settle
issues, offers get accepted or refused, unexpected content is
accommodated against the plan library), then advances the plan stack
item by item until some activation blocks waiting for the user, and
finally drains the queued system moves.

Every state mutation goes through the information-state primitives, and
with auditing on (the default) the structural invariants are re-checked
after every rule application, so a bug fails loudly at the step that
introduced it instead of surfacing turns later.
"""

from __future__ import annotations

from dataclasses import dataclass

from .info_state import EngineError, InformationState, check_well_formed, new_state
from .plan_library import load_builtin_plans, reachable_plans, validate_library
from .plans import (
    And,
    Assume,
    AssumeAction,
    AssumeIssue,
    Bind,
    Bound,
    Compare,
    ConsultDB,
    CooperativeAction,
    CooperativeSearch,
    Findout,
    Guard,
    IfThen,
    IfThenElse,
    InBel,
    InCom,
    LoadPlan,
    NotBound,
    NotInBel,
    NotInCom,
    NotSuccess,
    PlanActivation,
    PlanDef,
    PlanKind,
    PostCond,
    Raise,
    Report,
    Say,
    Success,
    SuggestStyle,
    TaskCall,
    While,
    plan_questions,
)
from .semantics import (
    ChoiceQ,
    Instance,
    NO,
    No,
    PartialQ,
    Proposition,
    Question,
    TotalQ,
    UNKNOWN,
    Unknown,
    YES,
    Yes,
    find_resolving_fact,
    match_atom,
    prop,
    question_predicates,
    resolves,
    resolving_binding,
    substitute_args,
)
from .speech_acts import ActKind, Speaker, SpeechAct
from .task_model import (
    EndOfList,
    FacetStore,
    QueryExpr,
    QueryNotBuildable,
    SuggestFailure,
    TaskModelError,
    load_default_store,
)

# Atom predicates that make up the query; their grounding order matters
# for subheading pairing, so consultDB reads them off the ground log.
FACET_PREDICATES = ("keyword", "subheading", "metaTerm", "resourceType")

# Facts tied to one result list: the documents themselves, their
# verdicts, and the advice derived from them.  All of it goes stale
# together, whenever a consult reruns or the user accepts a query edit.
RESULT_PREDICATES = (
    "document",
    "description",
    "nbdocuments",
    "tooMuchDocuments",
    "tooFewDocuments",
    "listAcceptable",
    "endOfList",
    "refineQuery",
    "broadenQuery",
    "queryNotBuildable",
    "noBroadening",
    "noRefinement",
)

END_OF_SEARCH = prop("endOfSearch")


@dataclass(frozen=True)
class _LoopMark:
    """Engine-internal program item marking a while re-entry point."""

    loop: While


@dataclass
class OfferStaging:
    """Edits held back until the user settles an offer."""

    content: Proposition
    grounds: tuple[Proposition, ...] = ()
    retracts: tuple[Proposition, ...] = ()
    clear_results: bool = False


@dataclass(frozen=True)
class EngineConfig:
    delta_min: int = 3
    delta_max: int = 30
    findout_max_asks: int = 3
    bind_max_waits: int = 3
    restart_cap_per_turn: int = 2
    max_item_steps: int = 500
    audit: bool = True


class DialogEngine:
    """Information-state-update engine over a plan library and a store."""

    def __init__(
        self,
        store: FacetStore | None = None,
        plans: dict[str, PlanDef] | None = None,
        config: EngineConfig | None = None,
    ):
        self.store = store if store is not None else load_default_store()
        self.plans = plans if plans is not None else load_builtin_plans()
        problems = validate_library(self.plans)
        if problems:
            raise EngineError("plan library rejected: %s" % "; ".join(problems))
        self.config = config or EngineConfig()
        self.state: InformationState = new_state()
        self.staged: dict[Question, OfferStaging] = {}
        # Order in which plans first became active, for inspection.
        self.activation_trace: list[str] = []
        self._acked_this_turn = False
        self._confirmed_this_turn = False
        self._unexpected: list[Proposition] = []
        if "opening" in self.plans:
            self._push_activation("opening")

    # ------------------------------------------------------------ step

    def step(self, user_acts=()) -> list[SpeechAct]:
        """Integrate one user turn (possibly empty) and produce the
        system's moves for the next turn."""
        state = self.state
        if state.ended:
            return []
        self._acked_this_turn = False
        self._confirmed_this_turn = False
        self._unexpected = []
        for activation in state.private.plan:
            activation.restarts_this_turn = 0
        if user_acts:
            state.turn = Speaker.USER
            for act in user_acts:
                self._integrate(act)
                self._audit("integrate %s" % act)
            self._accommodate()
            self._unblock()
        state.turn = Speaker.SYSTEM
        self._advance()
        if not state.private.nextmove and not state.ended:
            self._reprompt_or_fallback()
        elif not state.ended:
            self._reoffer_after_interruption()
        moves = state.drain_moves()
        if not state.ended:
            state.turn = Speaker.USER
        self._audit("end of step")
        return moves

    # ------------------------------------------------------- integrate

    def _integrate(self, act: SpeechAct) -> None:
        state = self.state
        kind = act.kind
        if kind in (ActKind.GREET, ActKind.ACKNOWLEDGE, ActKind.REQUEST_DIRECTIVE):
            return
        if kind in (ActKind.BYE, ActKind.WANTS_NOTHING):
            self._end_dialog()
            return
        if kind is ActKind.ANSWER:
            self._integrate_answer(self._as_answer(act.content))
            return
        if kind in (ActKind.INFORM, ActKind.INFORM_INTENT, ActKind.SUGGEST, ActKind.OFFER):
            if isinstance(act.content, Proposition) and act.content.is_ground():
                self._integrate_fact(act.content)
            return
        if kind is ActKind.ACCEPT:
            qud = state.public.qud
            if qud is not None and qud in self.staged:
                self._apply_staging(qud)
            elif isinstance(act.content, Proposition) and act.content.is_ground():
                self._integrate_fact(act.content)
            else:
                self._integrate_answer(YES)
            return
        if kind is ActKind.REFUSE:
            qud = state.public.qud
            if qud is not None and qud in self.staged:
                self._refuse_staging(qud)
            else:
                self._integrate_answer(NO)
            return
        if kind is ActKind.CONFIRM:
            # The user asks whether a fact holds for us; answer from the
            # whole belief store, without grounding anything new.
            if isinstance(act.content, Proposition):
                held = act.content in state.public.com or act.content in state.private.bel
                self._enqueue(ActKind.ANSWER, YES if held else UNKNOWN)
            return
        if kind in (ActKind.REQUEST_INFO, ActKind.ASK):
            if isinstance(act.content, (TotalQ, PartialQ, ChoiceQ)):
                fact = find_resolving_fact(act.content, state.private.bel)
                if fact is not None:
                    self._enqueue(ActKind.ANSWER, Instance(fact))
                else:
                    self._enqueue(ActKind.ANSWER, UNKNOWN)
            return

    @staticmethod
    def _as_answer(content):
        if isinstance(content, (Yes, No, Unknown, Instance)):
            return content
        if isinstance(content, Proposition):
            return Instance(content)
        return UNKNOWN

    def _integrate_answer(self, answer) -> None:
        state = self.state
        if isinstance(answer, Unknown):
            return
        if isinstance(answer, (Yes, No)):
            # A polar answer addresses the outermost polar question on
            # the table; a bare nod at an open question settles nothing.
            target = next(
                (q for q in reversed(state.public.issue) if isinstance(q, TotalQ)), None
            )
            if target is None:
                return
            if isinstance(answer, Yes):
                if target in self.staged:
                    self._apply_staging(target)
                    return
                self._ground_with_endcheck(target.proposition)
                return
            if target in self.staged:
                self._refuse_staging(target)
                return
            denied = target.proposition
            state.retract_issue(target)
            state.add_bel(prop("denied", str(denied)))
            if denied == END_OF_SEARCH:
                self._continue_search_cleanup()
            return
        self._integrate_fact(answer.proposition)

    def _integrate_fact(self, fact: Proposition) -> None:
        state = self.state
        for question in reversed(state.public.issue):
            if resolves(Instance(fact), question):
                if question in self.staged:
                    self._apply_staging(question)
                    return
                if question == state.public.qud and isinstance(question, (PartialQ, ChoiceQ)):
                    self._acknowledge_once()
                self._ground_with_endcheck(fact)
                return
        self._unexpected.append(fact)

    def _ground_with_endcheck(self, fact: Proposition) -> None:
        self.state.ground(fact)
        if fact == END_OF_SEARCH:
            self._end_dialog()

    def _acknowledge_once(self) -> None:
        if not self._acked_this_turn:
            self._enqueue(ActKind.ACKNOWLEDGE, None)
            self._acked_this_turn = True

    # ----------------------------------------------------- accommodate

    def _accommodate(self) -> None:
        """Fit unexpected but plan-relevant content into the dialog.

        A fact answering a question some plan could raise is grounded
        right away.  When the fact resolves an inactive plan's goal it
        is a service request in disguise, so that plan is pushed as an
        interruption; a fact hitting only an internal question is a
        parameter and just grounds, unless no active activation can
        reach the plan that wants it.  A fact matching no plan at all
        triggers at most one confirmation request per turn.
        """
        state = self.state
        if state.ended:
            return
        for fact in self._unexpected:
            if fact in state.public.com:
                continue
            target, goal_hit = self._accommodation_target(fact)
            if target is None:
                if not self._confirmed_this_turn:
                    self._confirmed_this_turn = True
                    state.push_issue(TotalQ(fact))
                    self._enqueue(ActKind.CONFIRM, fact)
                continue
            self._ground_with_endcheck(fact)
            if state.ended:
                return
            if goal_hit:
                if target not in state.active_plan_ids():
                    self._push_activation(target)
            elif not self._target_reachable(target):
                self._push_activation(target)
        self._unexpected = []

    def _accommodation_target(self, fact: Proposition) -> tuple[str | None, bool]:
        """Plan that wants this fact, plus whether it hits that plan's goal."""
        answer = Instance(fact)
        for plan_id, plan in self.plans.items():
            if plan.goal is not None and resolves(answer, plan.goal):
                return plan_id, True
        for plan_id, plan in self.plans.items():
            for question in plan_questions(plan):
                if resolves(answer, question):
                    return plan_id, False
        return None, False

    def _target_reachable(self, target: str) -> bool:
        active = self.state.active_plan_ids()
        if target in active:
            return True
        for plan_id in active:
            if target in reachable_plans(plan_id, self.plans):
                return True
        return False

    def _unblock(self) -> None:
        for activation in self.state.private.plan:
            if not activation.blocked:
                continue
            if activation.wait_any or activation.wait_issue not in self.state.public.issue:
                activation.blocked = False
                activation.wait_issue = None
                activation.wait_any = True

    # --------------------------------------------------------- advance

    def _advance(self) -> None:
        state = self.state
        steps = 0
        while not state.ended:
            steps += 1
            if steps > self.config.max_item_steps:
                raise EngineError(
                    "item budget exceeded; a plan is likely looping without blocking"
                )
            top = state.top_plan()
            if top is None:
                if self._load_for_top_issue():
                    continue
                break
            if top.blocked:
                break
            if top.break_scan:
                self._unwind_break(top)
                continue
            if top.done:
                if top.persistent:
                    if top.restarts_this_turn < self.config.restart_cap_per_turn:
                        self._restart(top)
                        continue
                    if self._load_for_top_issue():
                        continue
                    break
                self._pop_plan(top)
                continue
            item = top.program[0]
            self._exec_item(top, item)
            self._audit("exec %r" % (item,))

    def _restart(self, activation: PlanActivation) -> None:
        definition = self.plans[activation.plan_id]
        activation.program = list(definition.body)
        activation.bindings = {}
        activation.raised_once = set()
        activation.bind_waits = {}
        activation.break_scan = False
        activation.restarts_this_turn += 1

    def _pop_plan(self, activation: PlanActivation) -> None:
        state = self.state
        if state.top_plan() is not activation:
            raise EngineError("pop of a non-top plan activation")
        state.private.plan.pop()
        definition = self.plans.get(activation.plan_id)
        if definition is not None and definition.goal is not None:
            state.retract_issue(definition.goal)

    def _load_for_top_issue(self) -> bool:
        state = self.state
        top_issue = state.public.qud
        if top_issue is None:
            return False
        active = set(state.active_plan_ids())
        for plan_id, plan in self.plans.items():
            if plan.kind is PlanKind.QUESTION and plan.goal == top_issue:
                if plan_id in active:
                    return False
                # The issue is already on the table; loading must not
                # re-push it.
                self._push_activation(plan_id, push_goal=False)
                return True
        return False

    def _push_activation(self, plan_id: str, push_goal: bool = True) -> None:
        definition = self.plans.get(plan_id)
        if definition is None:
            raise EngineError("loadPlan of undefined plan %r" % plan_id)
        if plan_id in self.state.active_plan_ids():
            return
        self.activation_trace.append(plan_id)
        activation = PlanActivation(
            plan_id=plan_id,
            program=list(definition.body),
            persistent=definition.persistent,
        )
        self.state.push_plan(activation)
        if push_goal and definition.goal is not None:
            self.state.push_issue(definition.goal)

    def _unwind_break(self, activation: PlanActivation) -> None:
        """Drop program items up to and including the innermost loop mark."""
        activation.break_scan = False
        while activation.program:
            item = activation.program.pop(0)
            if isinstance(item, _LoopMark):
                return
        # No enclosing loop: the break simply exhausts the program.

    # ------------------------------------------------------ item rules

    def _exec_item(self, top: PlanActivation, item) -> None:
        if isinstance(item, _LoopMark):
            top.program.pop(0)
            if self._holds(item.loop.guard, top):
                top.program[0:0] = list(item.loop.body) + [item]
            return
        if isinstance(item, Findout):
            self._exec_findout(top, item)
            return
        if isinstance(item, Raise):
            self._exec_raise(top, item)
            return
        if isinstance(item, Bind):
            self._exec_bind(top, item)
            return
        if isinstance(item, Assume):
            top.program.pop(0)
            self.state.add_bel(self._subst(item.proposition, top))
            return
        if isinstance(item, AssumeAction):
            top.program.pop(0)
            self.state.public.action = item.action
            return
        if isinstance(item, AssumeIssue):
            top.program.pop(0)
            self.state.push_issue(item.question)
            return
        if isinstance(item, ConsultDB):
            self._exec_consult(top, item)
            return
        if isinstance(item, CooperativeSearch):
            self._exec_search(top, item)
            return
        if isinstance(item, CooperativeAction):
            top.program.pop(0)
            content = self._subst(item.proposition, top)
            self._make_offer(top, content, OfferStaging(content, grounds=(content,)))
            return
        if isinstance(item, Report):
            top.program.pop(0)
            payload = self._subst(item.payload, top)
            if payload.is_ground():
                self._say_inform(payload)
            return
        if isinstance(item, Say):
            top.program.pop(0)
            if item.kind == "greet":
                self._enqueue(ActKind.GREET, None)
                # Yield the turn so the user can reply to the greeting.
                top.blocked = True
                top.wait_any = True
            elif item.kind == "bye":
                self._enqueue(ActKind.BYE, None)
            else:
                raise EngineError("say(%s) is not a known ritual" % item.kind)
            return
        if isinstance(item, LoadPlan):
            top.program.pop(0)
            self._push_activation(item.plan_id)
            return
        if isinstance(item, PostCond):
            top.program.pop(0)
            self.state.add_bel(prop(item.name, item.value))
            return
        if isinstance(item, IfThen):
            top.program.pop(0)
            if self._holds(item.guard, top):
                top.program[0:0] = list(item.body)
            return
        if isinstance(item, IfThenElse):
            top.program.pop(0)
            branch = item.then_body if self._holds(item.guard, top) else item.else_body
            top.program[0:0] = list(branch)
            return
        if isinstance(item, While):
            top.program.pop(0)
            if self._holds(item.guard, top):
                top.program[0:0] = list(item.body) + [_LoopMark(item)]
            return
        if isinstance(item, TaskCall):
            self._exec_task_call(top, item)
            return
        raise EngineError("no rule for plan item %r" % (item,))

    # --- question items.  An asking item stays at the program head
    # while it waits; each revisit re-checks common ground first.

    def _exec_findout(self, top: PlanActivation, item: Findout) -> None:
        state = self.state
        question = item.question
        fact = find_resolving_fact(question, state.public.com)
        if fact is not None:
            top.bindings.update(resolving_binding(question, fact) or {})
            top.program.pop(0)
            state.retract_issue(question)
            return
        if isinstance(question, TotalQ):
            denial = prop("denied", str(question.proposition))
            if denial in state.private.bel:
                state.retract_com(denial)
                top.program.pop(0)
                state.retract_issue(question)
                return
        asked = state.abort_counters.get(question, 0)
        if asked >= self.config.findout_max_asks:
            top.program.pop(0)
            state.retract_issue(question)
            if asked == self.config.findout_max_asks:
                state.abort_counters[question] = asked + 1
                self._say_inform(prop("abandonedQuestion", self._question_tag(question)))
                if question == TotalQ(END_OF_SEARCH):
                    # Even the exit question went nowhere; close down
                    # rather than spiral.
                    self._end_dialog()
            return
        state.abort_counters[question] = asked + 1
        state.push_issue(question)
        self._enqueue(ActKind.ASK, question)
        top.blocked = True
        top.wait_any = True

    def _exec_raise(self, top: PlanActivation, item: Raise) -> None:
        state = self.state
        question = item.question
        fact = find_resolving_fact(question, state.public.com)
        if fact is not None:
            top.bindings.update(resolving_binding(question, fact) or {})
            top.program.pop(0)
            state.retract_issue(question)
            return
        if str(question) in top.raised_once:
            top.program.pop(0)
            state.retract_issue(question)
            return
        top.raised_once.add(str(question))
        state.push_issue(question)
        self._enqueue(ActKind.ASK, question)
        top.blocked = True
        top.wait_any = True

    def _exec_bind(self, top: PlanActivation, item: Bind) -> None:
        state = self.state
        question = item.question
        fact = find_resolving_fact(question, state.public.com)
        if fact is not None:
            top.bindings.update(resolving_binding(question, fact) or {})
            top.program.pop(0)
            state.retract_issue(question)
            return
        waited = top.bind_waits.get(str(question), 0)
        if waited >= self.config.bind_max_waits:
            top.program.pop(0)
            state.retract_issue(question)
            return
        top.bind_waits[str(question)] = waited + 1
        state.push_issue(question)
        top.blocked = True
        top.wait_any = True

    @staticmethod
    def _question_tag(question: Question):
        if isinstance(question, TotalQ):
            return question.proposition.predicate
        if isinstance(question, PartialQ):
            return question.predicate
        first = question.alternatives[0]
        return first.proposition.predicate if isinstance(first, TotalQ) else first.predicate

    # --- task-facing items

    def _current_facets(self) -> list[Proposition]:
        com = self.state.public.com
        return [
            p
            for p in self.state.ground_log
            if p.predicate in FACET_PREDICATES and p in com
        ]

    def _current_query(self) -> QueryExpr | None:
        try:
            return self.store.build_query(self._current_facets())
        except TaskModelError:
            return None

    def _exec_consult(self, top: PlanActivation, item: ConsultDB) -> None:
        state = self.state
        top.program.pop(0)
        try:
            query = self.store.build_query(self._current_facets())
        except QueryNotBuildable:
            self._say_inform(prop("queryNotBuildable"))
            return
        docs = self.store.retrieve(query)
        self._clear_results()
        for doc in docs:
            state.add_bel(prop("document", doc.id))
        count = len(docs)
        if isinstance(item.question, PartialQ):
            top.bindings[item.question.var] = count
        self._say_inform(prop("nbdocuments", count))

    def _exec_task_call(self, top: PlanActivation, item: TaskCall) -> None:
        state = self.state
        top.program.pop(0)
        if item.name == "countDocuments":
            if item.var:
                top.bindings[item.var] = len(state.bel_with("document"))
            return
        if item.name == "discardTerms":
            state.retract_where("term")
            return
        if item.name == "discardQuery":
            # A fresh topic supersedes the running search: forget the
            # built query and everything derived from it.
            for predicate in FACET_PREDICATES:
                state.retract_where(predicate)
            self._clear_results()
            return
        if item.name == "memberNext":
            # Cursor over the stable full id order; dismissed documents
            # (refused or already handled) are skipped, not re-offered.
            ids = [str(p.args[0]) for p in state.bel_with("document")]
            cursor = int(top.bindings.get("__cursor", 0))
            while True:
                try:
                    doc, cursor = self.store.member_next(ids, cursor)
                except EndOfList:
                    top.break_scan = True
                    return
                if prop("dismissed", "interesting(%s)" % doc.id) not in state.private.bel:
                    break
            if item.var:
                top.bindings[item.var] = doc.id
            top.bindings["__cursor"] = cursor
            return
        if item.name == "discardRequest":
            # One-shot topics (definition, explanation) are consumed once
            # served; the persistent document search keeps its routing fact.
            for predicate in ("define", "explain", "definition", "noDefinition", "noExplanation"):
                state.retract_where(predicate)
            state.retract_com(prop("question", "definition"))
            state.retract_com(prop("question", "explanation"))
            return
        if item.name == "lookupDefinition":
            target = None
            for atom in reversed(state.ground_log):
                if atom.predicate == "define" and atom.args:
                    target = str(atom.args[0])
                    break
            definition = None
            if target is not None:
                definition = self.store.definition_of(target)
                if definition is None:
                    term = self.store.lookup_surface(target)
                    if term is not None:
                        definition = self.store.definition_of(term.id)
            if item.var:
                top.bindings[item.var] = "success" if definition else "failure"
            return
        raise EngineError("taskCall %r has no implementation" % item.name)

    # --- cooperative search and offers

    _POOL_SOURCES = {"term": "com", "keyword": "com", "document": "bel"}

    def _search_pool(self, source: Proposition) -> list[Proposition]:
        where = self._POOL_SOURCES.get(source.predicate)
        if where == "com":
            return self.state.com_with(source.predicate)
        if where == "bel":
            return self.state.bel_with(source.predicate)
        return []

    def _exec_search(self, top: PlanActivation, item: CooperativeSearch) -> None:
        top.program.pop(0)
        pattern = item.pattern.predicate
        if pattern == "broaden":
            self._exec_broaden(top, item)
            return
        pool = self._search_pool(item.source)
        result = self.store.suggest(pattern, pool)
        candidates: list[Proposition] = []
        if not isinstance(result, SuggestFailure):
            candidates = [
                c for c in result.propositions if self._candidate_ok(pattern, c, item.style)
            ]
        if not candidates:
            top.bindings[item.result_var] = "failure"
            return
        top.bindings[item.result_var] = "success"
        if item.style is SuggestStyle.SUGGEST:
            # Announce and establish every mapping; silence is assent.
            for candidate in candidates:
                self._enqueue(ActKind.SUGGEST, candidate)
                self.state.ground(candidate)
            return
        candidate = candidates[0]
        self._make_offer(top, candidate, self._staging_for(pattern, candidate))

    def _candidate_ok(self, pattern: str, candidate: Proposition, style: SuggestStyle) -> bool:
        state = self.state
        if candidate in state.public.com:
            return False
        if prop("dismissed", str(candidate)) in state.private.bel:
            return False
        if style is SuggestStyle.SUGGEST:
            return True
        # Offered refinements must actually narrow the current result.
        query = self._current_query()
        if query is None:
            return True
        if pattern == "metaTerm" and str(candidate.args[0]) in self.store.implied_metas(query):
            return False
        edited = self._apply_edit_to_query(self._staging_for(pattern, candidate))
        if edited is None:
            return True
        try:
            narrowed = len(self.store.retrieve(edited))
            current = len(self.store.retrieve(query))
        except TaskModelError:
            return False
        return 0 < narrowed < current

    def _staging_for(self, pattern: str, candidate: Proposition) -> OfferStaging:
        if pattern == "specificTerm":
            # The candidate keyword replaces the query keyword it narrows.
            parent = None
            query = self._current_query()
            if query is not None:
                hypo = str(candidate.args[0])
                for k, _ in query.conjuncts:
                    if hypo != k and hypo in self.store.descendants(k):
                        parent = k
                        break
            retracts = (prop("keyword", parent),) if parent else ()
            return OfferStaging(
                candidate, grounds=(candidate,), retracts=retracts, clear_results=True
            )
        if pattern in ("metaTerm", "subheading", "keyword"):
            return OfferStaging(candidate, grounds=(candidate,), clear_results=True)
        return OfferStaging(candidate, grounds=(candidate,))

    def _apply_edit_to_query(self, staging: OfferStaging) -> QueryExpr | None:
        facets = [p for p in self._current_facets() if p not in staging.retracts]
        facets.extend(staging.grounds)
        try:
            return self.store.build_query(facets)
        except TaskModelError:
            return None

    def _exec_broaden(self, top: PlanActivation, item: CooperativeSearch) -> None:
        query = self._current_query()
        if query is None:
            top.bindings[item.result_var] = "failure"
            return
        for _candidate_query, edit in self.store.expand_query(query):
            if prop("dismissed", str(edit)) in self.state.private.bel:
                continue
            top.bindings[item.result_var] = "success"
            self._make_offer(top, edit, self._staging_from_edit(edit, query))
            return
        top.bindings[item.result_var] = "failure"

    def _staging_from_edit(self, edit: Proposition, query: QueryExpr) -> OfferStaging:
        retracts: list[Proposition] = []
        grounds: list[Proposition] = []
        if edit.predicate == "dropSubheading":
            retracts.append(prop("subheading", str(edit.args[0])))
        elif edit.predicate == "replaceKeyword":
            retracts.append(prop("keyword", str(edit.args[0])))
            grounds.append(prop("keyword", str(edit.args[1])))
        elif edit.predicate == "dropResourceType":
            retracts.append(prop("resourceType", str(edit.args[0])))
        elif edit.predicate == "dropMetaTerm":
            retracts.append(prop("metaTerm", str(edit.args[0])))
        elif edit.predicate == "dropKeyword":
            dropped = str(edit.args[0])
            retracts.append(prop("keyword", dropped))
            for k, s in query.conjuncts:
                if k == dropped and s is not None:
                    retracts.append(prop("subheading", s))
        return OfferStaging(
            edit, grounds=tuple(grounds), retracts=tuple(retracts), clear_results=True
        )

    def _make_offer(self, top: PlanActivation, content: Proposition, staging: OfferStaging) -> None:
        key = TotalQ(content)
        self.staged[key] = staging
        self.state.push_issue(key)
        self._enqueue(ActKind.OFFER, content)
        top.blocked = True
        top.wait_any = False
        top.wait_issue = key

    def _apply_staging(self, key: Question) -> None:
        staging = self.staged.pop(key)
        state = self.state
        for atom in staging.retracts:
            state.retract_com(atom)
        if staging.clear_results:
            self._clear_results()
        for atom in staging.grounds:
            self._ground_with_endcheck(atom)
        state.retract_issue(key)

    def _refuse_staging(self, key: Question) -> None:
        staging = self.staged.pop(key)
        self.state.add_bel(prop("dismissed", str(staging.content)))
        self.state.retract_issue(key)

    # ------------------------------------------------- cleanup / ending

    def _clear_results(self) -> None:
        for predicate in RESULT_PREDICATES:
            self.state.retract_where(predicate)

    def _continue_search_cleanup(self) -> None:
        """The user wants to keep searching: the built query and its
        results are settled business, and already-handled documents
        must not come up again.  Dropping the facets too means the next
        pass asks for (or picks up) a fresh topic instead of replaying
        a query the user has already walked away from."""
        state = self.state
        for fact in state.com_with("interesting"):
            state.add_bel(prop("dismissed", str(fact)))
            state.retract_com(fact)
        for predicate in FACET_PREDICATES:
            state.retract_where(predicate)
        self._clear_results()
        for question in list(state.public.issue):
            if "interesting" in question_predicates(question):
                state.retract_issue(question)
                self.staged.pop(question, None)

    def _end_dialog(self) -> None:
        state = self.state
        self.staged.clear()
        state.private.plan.clear()
        state.private.agenda.clear()
        state.public.issue.clear()
        state.public.qud = None
        state.public.action = None
        self._enqueue(ActKind.BYE, None)
        state.ended = True

    # ----------------------------------------------------------- guards

    def _holds(self, guard: Guard, top: PlanActivation) -> bool:
        state = self.state
        if isinstance(guard, And):
            return all(self._holds(part, top) for part in guard.parts)
        if isinstance(guard, (InCom, NotInCom)):
            pattern = substitute_args(guard.pattern, top.bindings)
            hit = any(match_atom(pattern, f) is not None for f in state.public.com)
            return hit if isinstance(guard, InCom) else not hit
        if isinstance(guard, (InBel, NotInBel)):
            pattern = substitute_args(guard.pattern, top.bindings)
            hit = any(match_atom(pattern, f) is not None for f in state.private.bel)
            return hit if isinstance(guard, InBel) else not hit
        if isinstance(guard, Bound):
            return guard.var in top.bindings
        if isinstance(guard, NotBound):
            return guard.var not in top.bindings
        if isinstance(guard, Success):
            return top.bindings.get(guard.var) == "success"
        if isinstance(guard, NotSuccess):
            return top.bindings.get(guard.var) != "success"
        if isinstance(guard, Compare):
            value = top.bindings.get(guard.var)
            if not isinstance(value, int):
                return False
            rhs = guard.rhs
            if rhs == "deltaMin":
                rhs = self.config.delta_min
            elif rhs == "deltaMax":
                rhs = self.config.delta_max
            if not isinstance(rhs, int):
                return False
            return value < rhs if guard.op == "lt" else value > rhs
        raise EngineError("no evaluation rule for guard %r" % (guard,))

    # -------------------------------------------------------- utilities

    def _subst(self, atom: Proposition, top: PlanActivation) -> Proposition:
        return substitute_args(atom, top.bindings)

    def _say_inform(self, content: Proposition) -> None:
        """Announce a fact and ground it optimistically: the system
        treats its own assertions as accepted unless challenged."""
        self._enqueue(ActKind.INFORM, content)
        self.state.ground(content)

    def _enqueue(self, kind: ActKind, content) -> None:
        self.state.enqueue_move(SpeechAct(kind, content, Speaker.SYSTEM))

    def _reoffer_after_interruption(self) -> None:
        """When a side request was served over a pending offer, put the
        offer back on the table so the turn still ends with a question.
        Skipped if this turn already poses one of its own."""
        state = self.state
        asking = {ActKind.ASK, ActKind.OFFER, ActKind.CONFIRM}
        if any(move.kind in asking for move in state.private.nextmove):
            return
        top = state.top_plan()
        if top is not None and top.blocked and not top.wait_any and top.wait_issue in self.staged:
            self._enqueue(ActKind.OFFER, self.staged[top.wait_issue].content)

    def _reprompt_or_fallback(self) -> None:
        state = self.state
        top = state.top_plan()
        if top is not None and top.blocked:
            if top.wait_issue in self.staged:
                # The pending offer got no reply; put it back on the table.
                self._enqueue(ActKind.OFFER, self.staged[top.wait_issue].content)
            return
        # Nothing to do and nothing pending: invite a topic.  A topic
        # fact still on the board at this point is an orphan: the plan
        # that took it up has run out, so it must not block the new
        # invitation.
        engage = PartialQ("question", "q")
        stale = find_resolving_fact(engage, state.public.com)
        while stale is not None:
            state.retract_com(stale)
            stale = find_resolving_fact(engage, state.public.com)
        state.push_issue(engage)
        self._advance()
        if not state.private.nextmove and not state.ended:
            self._enqueue(ActKind.ASK, engage)

    def _audit(self, where: str) -> None:
        if not self.config.audit:
            return
        problems = check_well_formed(self.state)
        if problems:
            raise EngineError("ill-formed state after %s: %s" % (where, "; ".join(problems)))


def new_engine(
    store: FacetStore | None = None,
    plans: dict[str, PlanDef] | None = None,
    config: EngineConfig | None = None,
) -> DialogEngine:
    return DialogEngine(store, plans, config)
