"""Rule-based utterance understanding and generation.

Tagging turns one raw user utterance into dialog moves: the text is cut
into sentence segments, each segment runs through an ordered cue-rule
table, and the winning rule's extractor builds the acts, consulting the
pending question under discussion to choose between an answer and a
plain statement.  Term recognition maps longest known surface forms
(labels, synonyms, ids) onto terminology entries.  Rendering goes the
other way: each system move picks the most specific template for its
kind and payload and fills the slots from the store.

Both rule tables are plain line-oriented data files (``tagging.rules``
and ``system.templates``), so a deployment can swap them per language
without touching code.  There is deliberately no part-of-speech
tagging, spelling correction, statistics or anaphora here: anchored cue
patterns plus the dialog state carry the whole burden, which keeps the
mapping auditable and bit-stable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from .semantics import (
    NO,
    YES,
    ChoiceQ,
    Instance,
    No,
    PartialQ,
    Proposition,
    Question,
    TotalQ,
    Unknown,
    Yes,
    is_variable,
    prop,
    question_predicates,
)
from .speech_acts import ActKind, Speaker, SpeechAct
from .task_model import FacetStore, TermKind, load_default_store


class FrontendError(ValueError):
    """Raised for malformed rule or template data."""


# ------------------------------------------------------------ tag rules

_CONTEXTS = frozenset(
    {"any", "polar", "open", "noqud", "qmark", "stmt", "openslot"}
)

_EXTRACTORS = frozenset(
    {
        "none",
        "polar_yes",
        "polar_no",
        "topic_document",
        "topic_definition",
        "topic_explanation",
        "define_request",
        "topic_confirm",
        "topic_question",
        "slot_answer",
    }
)

# Open questions whose answer is a free subject the user just names.
_SLOT_PREDICATES = ("term", "define", "explain")


@dataclass(frozen=True)
class TagRule:
    """One cue rule: contexts gate it, the pattern fires it, the
    extractor turns the matched segment into dialog moves."""

    priority: int
    contexts: frozenset[str]
    kind: ActKind
    extractor: str
    pattern: re.Pattern
    consume_rest: bool = False


def parse_tag_rules(text: str) -> list[TagRule]:
    rules: list[TagRule] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("|", 4)
        if len(fields) != 5:
            raise FrontendError("rule line %d: expected 5 fields" % lineno)
        pri_s, ctx_s, kind_s, extract_s, pattern_s = (f.strip() for f in fields)
        try:
            priority = int(pri_s)
        except ValueError:
            raise FrontendError("rule line %d: bad priority %r" % (lineno, pri_s))
        contexts = frozenset(tok.strip() for tok in ctx_s.split(",") if tok.strip())
        if not contexts <= _CONTEXTS:
            raise FrontendError(
                "rule line %d: unknown context %s" % (lineno, sorted(contexts - _CONTEXTS))
            )
        try:
            kind = ActKind(kind_s)
        except ValueError:
            raise FrontendError("rule line %d: unknown act kind %r" % (lineno, kind_s))
        parts = [tok.strip() for tok in extract_s.split(",")]
        extractor, flags = parts[0], set(parts[1:])
        if extractor not in _EXTRACTORS:
            raise FrontendError("rule line %d: unknown extractor %r" % (lineno, extractor))
        if not flags <= {"rest"}:
            raise FrontendError("rule line %d: unknown flag %s" % (lineno, sorted(flags - {"rest"})))
        try:
            pattern = re.compile(pattern_s, re.IGNORECASE)
        except re.error as exc:
            raise FrontendError("rule line %d: bad pattern: %s" % (lineno, exc))
        rules.append(TagRule(priority, contexts, kind, extractor, pattern, "rest" in flags))
    rules.sort(key=lambda r: r.priority)
    return rules


def builtin_rules_path():
    return resources.files("faceted_dialog") / "data" / "tagging.rules"


def load_tag_rules(path=None) -> list[TagRule]:
    source = builtin_rules_path() if path is None else path
    with open(str(source), encoding="utf-8") as handle:
        return parse_tag_rules(handle.read())


# ----------------------------------------------------- term recognition


def recognize_terms(text: str, store: FacetStore) -> list[tuple[str, tuple[int, int]]]:
    """Known terminology mentions in the text, left to right.

    Greedy longest match over every label, synonym and id the store
    knows, non-overlapping; returns (term id, (start, end)) pairs with
    character offsets into the original text.  Multi-word surfaces must
    be separated by whitespace only, so a comma blocks a false join.
    """
    tokens = [(m.group(), m.start(), m.end()) for m in re.finditer(r"\w+", text)]
    if not tokens:
        return []
    join_ok = [
        text[tokens[k][2] : tokens[k + 1][1]].isspace()
        for k in range(len(tokens) - 1)
    ]
    max_words = 1
    for surface, _ in store.surfaces_by_length:
        max_words = max(max_words, surface.count(" ") + 1)
    out: list[tuple[str, tuple[int, int]]] = []
    i = 0
    while i < len(tokens):
        hit = None
        for width in range(min(max_words, len(tokens) - i), 0, -1):
            if width > 1 and not all(join_ok[i : i + width - 1]):
                continue
            raw = " ".join(tok[0] for tok in tokens[i : i + width])
            term = store.lookup_surface(raw)
            if term is not None:
                hit = (term.id, (tokens[i][1], tokens[i + width - 1][2]), width)
                break
        if hit is None:
            i += 1
        else:
            out.append(hit[:2])
            i += hit[2]
    return out


# Function words and search boilerplate stripped before slugging the
# free part of an utterance into an atom argument.
_STOPWORDS = frozenset(
    """a an the i we you it me my our your is are am was were do does did
    be been being to of in on at for with about and or but that this
    these those there here what which who whom how why when where want
    wanted would like need please find search searching looking look
    know tell show give get document documents article articles paper
    papers leaflet leaflets guideline guidelines some any all can could
    shall should will d s m ll t don dont not no yes mean means meaning
    definition definitions explanation explanations explain info
    information something anything nothing more else exactly so well
    think hello hi hey there thanks thank ok okay oh ah um uh right
    sure maybe just again now then""".split()
)


def _content_words(text: str) -> list[str]:
    words = [w.lower() for w in re.findall(r"\w+", text)]
    return [w for w in words if w not in _STOPWORDS and not w.isdigit()]


def _slug(words) -> str | None:
    joined = "_".join(w.lower() for w in words)
    cleaned = re.sub(r"[^a-z0-9_]", "", joined).strip("_")[:40]
    if not cleaned:
        return None
    if not re.match(r"^[a-z_]", cleaned):
        cleaned = "u_" + cleaned
    if is_variable(cleaned):
        # single letters parse as plan variables, not constants
        cleaned += "_"
    return cleaned


def _facet_atom(store: FacetStore, term_id: str, keyword_as: str = "term") -> Proposition:
    kind = store.terms[term_id].kind
    if kind is TermKind.KEYWORD:
        return prop(keyword_as, term_id)
    return prop(kind.value, term_id)


# -------------------------------------------------------------- tagging

_SEGMENT_RE = re.compile(r"[^.!?;]+[.!?;]*")


def split_segments(text: str) -> list[str]:
    return [m.group().strip() for m in _SEGMENT_RE.finditer(text) if m.group().strip()]


def _qud_of(ctx) -> Question | None:
    if ctx is None:
        return None
    if isinstance(ctx, (TotalQ, PartialQ, ChoiceQ)):
        return ctx
    return getattr(ctx, "qud", None)


def _engages_question(qud: Question | None) -> bool:
    return qud is not None and "question" in question_predicates(qud)


def _open_slot(qud: Question | None) -> str | None:
    if isinstance(qud, PartialQ) and qud.predicate in _SLOT_PREDICATES:
        return qud.predicate
    return None


def _context_ok(rule: TagRule, qud: Question | None, segment: str) -> bool:
    for token in rule.contexts:
        if token == "any":
            continue
        if token == "polar" and not isinstance(qud, TotalQ):
            return False
        if token == "open" and not isinstance(qud, (PartialQ, ChoiceQ)):
            return False
        if token == "noqud" and qud is not None:
            return False
        if token == "qmark" and not segment.rstrip().endswith("?"):
            return False
        if token == "stmt" and segment.rstrip().endswith("?"):
            return False
        if token == "openslot" and _open_slot(qud) is None:
            return False
    return True


def _topic_acts(topic: str, segment: str, qud, store, mk) -> list[SpeechAct]:
    atom = prop("question", topic)
    if _engages_question(qud):
        acts = [mk(ActKind.ANSWER, Instance(atom))]
    else:
        acts = [mk(ActKind.INFORM, atom)]
    terms = recognize_terms(segment, store)
    if topic == "document":
        for term_id, _ in terms:
            acts.append(mk(ActKind.INFORM, _facet_atom(store, term_id)))
        if not terms:
            slug = _slug(_content_words(segment))
            if slug:
                acts.append(mk(ActKind.INFORM, prop("term", slug)))
    elif topic == "definition":
        subject = terms[0][0] if terms else _slug(_content_words(segment))
        if subject:
            acts.append(mk(ActKind.INFORM, prop("define", subject)))
    elif topic == "explanation":
        subject = terms[0][0] if terms else _slug(_content_words(segment))
        if subject:
            acts.append(mk(ActKind.INFORM, prop("explain", subject)))
    return acts


def _apply_extractor(rule: TagRule, match, segment: str, qud, store, mk):
    name = rule.extractor
    if name == "none":
        return [mk(rule.kind)]
    if name in ("polar_yes", "polar_no"):
        polarity = YES if name == "polar_yes" else NO
        acts = [mk(ActKind.ANSWER, polarity)]
        # "no, try sleep disorders instead": the tail may carry the
        # user's real point, so sweep it for known terms.
        for term_id, _ in recognize_terms(segment[match.end() :], store):
            acts.append(mk(ActKind.INFORM, _facet_atom(store, term_id)))
        return acts
    if name in ("topic_confirm", "topic_question"):
        terms = recognize_terms(segment, store)
        atom = _facet_atom(store, terms[0][0], keyword_as="keyword") if terms else None
        if name == "topic_question":
            return [mk(rule.kind, TotalQ(atom) if atom is not None else None)]
        return [mk(rule.kind, atom)]
    if name == "define_request":
        rest = segment[match.end() :]
        terms = recognize_terms(rest, store) or recognize_terms(segment, store)
        subject = terms[0][0] if terms else _slug(_content_words(rest or segment))
        atom = prop("question", "definition")
        if _engages_question(qud):
            acts = [mk(ActKind.ANSWER, Instance(atom))]
        else:
            acts = [mk(ActKind.INFORM, atom)]
        if subject:
            acts.append(mk(ActKind.INFORM, prop("define", subject)))
        return acts
    if name == "topic_document":
        return _topic_acts("document", segment, qud, store, mk)
    if name == "topic_definition":
        return _topic_acts("definition", segment, qud, store, mk)
    if name == "topic_explanation":
        return _topic_acts("explanation", segment, qud, store, mk)
    if name == "slot_answer":
        slot = _open_slot(qud)
        terms = recognize_terms(segment, store)
        value = terms[0][0] if terms else _slug(_content_words(segment))
        if slot is None or value is None:
            return None
        acts = [mk(ActKind.ANSWER, Instance(prop(slot, value)))]
        for term_id, _ in terms[1:]:
            acts.append(mk(ActKind.INFORM, _facet_atom(store, term_id)))
        return acts
    raise FrontendError("unknown extractor %r" % name)


def _fallback_acts(segment: str, store, mk) -> list[SpeechAct]:
    terms = recognize_terms(segment, store)
    if terms:
        return [mk(ActKind.INFORM, _facet_atom(store, term_id)) for term_id, _ in terms]
    slug = _slug(_content_words(segment))
    if slug is None:
        # nothing but function words or rituals; let the engine reprompt
        return []
    return [mk(ActKind.INFORM, prop("unknownUtterance", slug))]


def _tag_segment(segment, qud, store, rules, depth=0) -> list[SpeechAct]:
    def mk(kind, content=None):
        return SpeechAct(kind, content, Speaker.USER, segment)

    for rule in rules:
        if not _context_ok(rule, qud, segment):
            continue
        match = rule.pattern.search(segment)
        if match is None:
            continue
        produced = _apply_extractor(rule, match, segment, qud, store, mk)
        if produced is None:
            continue
        if rule.consume_rest and depth < 3:
            rest = segment[match.end() :].strip()
            if rest:
                produced = produced + _tag_segment(rest, qud, store, rules, depth + 1)
        return produced
    return _fallback_acts(segment, store, mk)


def tag_utterance(text, ctx=None, store=None, rules=None) -> list[SpeechAct]:
    """Map one user utterance to its dialog moves.

    ``ctx`` is the public dialog state (only its question under
    discussion matters) or a bare question or None.  Segments are tagged
    independently but in order, so a turn can carry several moves.  A
    segment no rule claims falls back to the terms it mentions, and a
    segment with no recognizable content becomes a single statement the
    engine will ask to confirm.  Empty input yields no moves.
    """
    if not text or not text.strip():
        return []
    if store is None:
        store = _default_store()
    if rules is None:
        rules = _default_rules()
    qud = _qud_of(ctx)
    acts: list[SpeechAct] = []
    for segment in split_segments(text):
        acts.extend(_tag_segment(segment, qud, store, rules))
    return acts


# ------------------------------------------------------------ rendering


@dataclass
class Lexicon:
    """Surface templates plus the store used to resolve labels."""

    templates: dict[str, str]
    options: dict[str, str]
    store: FacetStore | None = None


def parse_templates(text: str) -> tuple[dict[str, str], dict[str, str]]:
    templates: dict[str, str] = {}
    options: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "|" not in line:
            raise FrontendError("template line %d: expected 'key | text'" % lineno)
        key, body = (part.strip() for part in line.split("|", 1))
        if not key or not body:
            raise FrontendError("template line %d: empty key or text" % lineno)
        bucket = options if key.startswith("option:") else templates
        name = key[len("option:") :] if key.startswith("option:") else key
        if name in bucket:
            raise FrontendError("template line %d: duplicate key %r" % (lineno, key))
        bucket[name] = body
    return templates, options


def validate_lexicon(templates: dict[str, str]) -> list[str]:
    """Every act kind must have at least a fallback template."""
    problems = []
    for kind in ActKind:
        if kind.value not in templates and "%s:*" % kind.value not in templates:
            problems.append("no template for act kind %r" % kind.value)
    return problems


def builtin_templates_path():
    return resources.files("faceted_dialog") / "data" / "system.templates"


def load_lexicon(store: FacetStore | None = None, path=None) -> Lexicon:
    source = builtin_templates_path() if path is None else path
    with open(str(source), encoding="utf-8") as handle:
        templates, options = parse_templates(handle.read())
    problems = validate_lexicon(templates)
    if problems:
        raise FrontendError("template file rejected: %s" % "; ".join(problems))
    return Lexicon(templates, options, store)


def _label(store: FacetStore | None, value) -> str:
    text = str(value)
    if store is not None:
        doc = store.documents.get(text)
        if doc is not None:
            return doc.title
        term = store.terms.get(text) or store.lookup_surface(text)
        if term is not None:
            return term.label
    return text.replace("_", " ")


def _long_text(store: FacetStore | None, value) -> str:
    text = str(value)
    if store is None:
        return ""
    doc = store.documents.get(text)
    if doc is not None:
        return doc.description or doc.title
    term = store.terms.get(text) or store.lookup_surface(text)
    if term is not None:
        return term.definition
    return ""


def _prop_display(store, proposition: Proposition) -> str:
    if not proposition.args:
        return _label(store, proposition.predicate)
    return "%s %s" % (
        _label(store, proposition.predicate),
        ", ".join(_label(store, a) for a in proposition.args),
    )


def _option_text(lexicon: Lexicon, alt) -> str:
    if (
        isinstance(alt, TotalQ)
        and alt.proposition.predicate == "question"
        and len(alt.proposition.args) == 1
    ):
        key = str(alt.proposition.args[0])
        if key in lexicon.options:
            return lexicon.options[key]
    return str(alt)


def _enumerate_options(lexicon: Lexicon, question: ChoiceQ) -> str:
    texts = [_option_text(lexicon, alt) for alt in question.alternatives]
    return "%s or %s" % (", ".join(texts[:-1]), texts[-1])


_SLOT_RE = re.compile(r"\{(L|T|N)?([0-9])\}|\{OPTIONS\}|\{P\}|\{Q\}")


def _template_key(act: SpeechAct) -> list[str]:
    kind = act.kind.value
    content = act.content
    keys: list[str] = []
    if isinstance(content, Yes):
        keys.append("%s:yes" % kind)
    elif isinstance(content, No):
        keys.append("%s:no" % kind)
    elif isinstance(content, Unknown):
        keys.append("%s:unknown" % kind)
    elif isinstance(content, Instance):
        keys.append("%s:%s" % (kind, content.proposition.predicate))
    elif isinstance(content, Proposition):
        keys.append("%s:%s" % (kind, content.predicate))
    elif isinstance(content, ChoiceQ):
        keys.append("%s:set" % kind)
    elif isinstance(content, (TotalQ, PartialQ)):
        preds = sorted(question_predicates(content))
        if len(preds) == 1:
            keys.append("%s:%s" % (kind, preds[0]))
    keys.append("%s:*" % kind)
    keys.append(kind)
    return keys


def render_act(act: SpeechAct, lexicon: Lexicon | None = None) -> str:
    """One deterministic surface line for a dialog move."""
    lexicon = lexicon if lexicon is not None else _default_lexicon()
    template = None
    for key in _template_key(act):
        template = lexicon.templates.get(key)
        if template is not None:
            break
    if template is None:
        raise FrontendError("no template covers act %s" % act)
    content = act.content
    if isinstance(content, Instance):
        payload = content.proposition
    elif isinstance(content, Proposition):
        payload = content
    else:
        payload = None
    args = payload.args if payload is not None else ()
    store = lexicon.store

    def fill(match: re.Match) -> str:
        token = match.group(0)
        if token == "{OPTIONS}":
            if isinstance(content, ChoiceQ):
                return _enumerate_options(lexicon, content)
            return ""
        if token == "{P}":
            return _prop_display(store, payload) if payload is not None else ""
        if token == "{Q}":
            return str(content) if isinstance(content, (TotalQ, PartialQ, ChoiceQ)) else ""
        flavor, index_s = match.group(1), match.group(2)
        index = int(index_s)
        if index >= len(args):
            return ""
        value = args[index]
        if flavor == "L":
            return _label(store, value)
        if flavor == "T":
            return _long_text(store, value)
        if flavor == "N":
            try:
                count = int(value)
            except (TypeError, ValueError):
                return str(value)
            return "%d document%s" % (count, "" if count == 1 else "s")
        return str(value)

    return _SLOT_RE.sub(fill, template)


def render(acts, lexicon: Lexicon | None = None) -> str:
    """Deterministic surface text for a whole system turn."""
    lexicon = lexicon if lexicon is not None else _default_lexicon()
    pieces = [render_act(act, lexicon) for act in acts]
    return " ".join(piece for piece in pieces if piece)


# ------------------------------------------------------------- defaults

_CACHE: dict[str, object] = {}


def _default_store() -> FacetStore:
    store = _CACHE.get("store")
    if store is None:
        store = load_default_store()
        _CACHE["store"] = store
    return store


def _default_rules() -> list[TagRule]:
    rules = _CACHE.get("rules")
    if rules is None:
        rules = load_tag_rules()
        _CACHE["rules"] = rules
    return rules


def _default_lexicon() -> Lexicon:
    lexicon = _CACHE.get("lexicon")
    if lexicon is None:
        lexicon = load_lexicon(_default_store())
        _CACHE["lexicon"] = lexicon
    return lexicon
