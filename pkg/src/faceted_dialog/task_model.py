"""Faceted terminology store, query builder, document index, evaluator.

The search domain is a small faceted terminology: meta terms (broad
specialties), keywords arranged in an acyclic broader/narrower
hierarchy, subheadings (aspects like therapy or diagnosis), and
resource types.  Documents carry a header of term ids.  Retrieval is
boolean with hierarchy closure: a keyword conjunct matches documents
indexed under the keyword or any transitive descendant, which is what
makes hyperonym expansion grow the result set.

Everything here is immutable after load; retrieval and suggestion are
pure reads and safe to share between sessions.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

from .semantics import Proposition, prop


class TermKind(Enum):
    META_TERM = "metaTerm"
    KEYWORD = "keyword"
    SUBHEADING = "subheading"
    RESOURCE_TYPE = "resourceType"


@dataclass(frozen=True)
class Term:
    id: str
    label: str
    kind: TermKind
    synonyms: frozenset[str] = frozenset()
    broader: frozenset[str] = frozenset()
    narrower: frozenset[str] = frozenset()
    meta_parents: frozenset[str] = frozenset()
    definition: str = ""


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    keywords: frozenset[str]
    subheadings: frozenset[str] = frozenset()
    resource_type: str | None = None
    description: str = ""
    url: str = ""


@dataclass(frozen=True)
class QueryExpr:
    """Boolean query: conjuncts of (keyword, optional subheading) plus
    an optional meta-term filter and resource-type filter."""

    conjuncts: tuple[tuple[str, str | None], ...]
    meta_filter: str | None = None
    resource_filter: str | None = None

    def __str__(self) -> str:
        parts = [
            "(%s, %s)" % (k, s if s else "-") for k, s in self.conjuncts
        ]
        text = " & ".join(parts)
        if self.meta_filter:
            text += " | meta=%s" % self.meta_filter
        if self.resource_filter:
            text += " | resource=%s" % self.resource_filter
        return text


@dataclass(frozen=True)
class EvaluatorConfig:
    delta_min: int = 3
    delta_max: int = 30

    def __post_init__(self) -> None:
        if self.delta_min < 0 or self.delta_min >= self.delta_max:
            raise ValueError("need 0 <= delta_min < delta_max")


# ------------------------------------------------------------- verdicts


@dataclass(frozen=True)
class NotEnough:
    count: int


@dataclass(frozen=True)
class TooMany:
    count: int


@dataclass(frozen=True)
class Acceptable:
    count: int


Verdict = NotEnough | TooMany | Acceptable


def evaluate_list(docs, cfg: EvaluatorConfig) -> Verdict:
    """Pure 3-way partition; boundary counts fall in the acceptable band.

    The inequalities are strict: NotEnough below delta_min, TooMany
    above delta_max, everything else (both boundaries included) is
    Acceptable.
    """
    n = len(docs)
    if n < cfg.delta_min:
        return NotEnough(n)
    if n > cfg.delta_max:
        return TooMany(n)
    return Acceptable(n)


# ------------------------------------------------------------- problems


class TaskModelError(ValueError):
    pass


class QueryNotBuildable(TaskModelError):
    """Common ground holds no keyword yet; a query needs at least one."""


class UnknownTermError(TaskModelError):
    pass


class EndOfList(Exception):
    """Cursor ran past the last document of a result list."""


# ---------------------------------------------------------- text normal


def normalize(text: str) -> str:
    """Case-fold, strip diacritics, collapse separators to single spaces."""
    folded = unicodedata.normalize("NFKD", text.casefold())
    stripped = "".join(c for c in folded if not unicodedata.combining(c))
    out: list[str] = []
    prev_space = True
    for c in stripped:
        if c.isalnum():
            out.append(c)
            prev_space = False
        elif not prev_space:
            out.append(" ")
            prev_space = True
    return "".join(out).strip()


# ----------------------------------------------------------- the store


@dataclass(frozen=True)
class SuggestSuccess:
    propositions: tuple[Proposition, ...]


@dataclass(frozen=True)
class SuggestFailure:
    pass


SUGGEST_PATTERNS = ("keyword", "metaTerm", "subheading", "specificTerm", "interesting")


class FacetStore:
    """Immutable terminology plus document index with the search ops."""

    def __init__(self, terms: dict[str, Term], documents: dict[str, Document]):
        self.terms = terms
        self.documents = documents
        # Normalized surface string -> term id, longest surfaces first.
        self._surface: dict[str, str] = {}
        for term in terms.values():
            for surface in {term.label, *term.synonyms, term.id}:
                self._surface.setdefault(normalize(surface), term.id)
        self.surfaces_by_length: list[tuple[str, str]] = sorted(
            self._surface.items(), key=lambda kv: (-len(kv[0]), kv[0])
        )

    # ------------------------------------------------------- hierarchy

    def descendants(self, keyword_id: str) -> frozenset[str]:
        """The keyword itself plus all transitive narrower terms."""
        seen: set[str] = set()
        stack = [keyword_id]
        while stack:
            current = stack.pop()
            if current in seen:
                continue
            seen.add(current)
            stack.extend(self.terms[current].narrower)
        return frozenset(seen)

    def lookup_surface(self, text: str) -> Term | None:
        term_id = self._surface.get(normalize(text))
        return self.terms.get(term_id) if term_id else None

    # ------------------------------------------------------- retrieval

    def _check_query(self, q: QueryExpr) -> None:
        if not q.conjuncts:
            raise TaskModelError("query needs at least one conjunct")
        for k, s in q.conjuncts:
            if k not in self.terms or self.terms[k].kind is not TermKind.KEYWORD:
                raise UnknownTermError("unknown keyword %r" % k)
            if s is not None and (
                s not in self.terms or self.terms[s].kind is not TermKind.SUBHEADING
            ):
                raise UnknownTermError("unknown subheading %r" % s)
        if q.meta_filter is not None and (
            q.meta_filter not in self.terms
            or self.terms[q.meta_filter].kind is not TermKind.META_TERM
        ):
            raise UnknownTermError("unknown meta term %r" % q.meta_filter)
        if q.resource_filter is not None and (
            q.resource_filter not in self.terms
            or self.terms[q.resource_filter].kind is not TermKind.RESOURCE_TYPE
        ):
            raise UnknownTermError("unknown resource type %r" % q.resource_filter)

    def _matches(self, doc: Document, q: QueryExpr) -> bool:
        for k, s in q.conjuncts:
            closure = self.descendants(k)
            if not (doc.keywords & closure):
                return False
            if s is not None and s not in doc.subheadings:
                return False
        if q.meta_filter is not None:
            if not any(
                q.meta_filter in self.terms[kid].meta_parents
                for kid in doc.keywords
                if kid in self.terms
            ):
                return False
        if q.resource_filter is not None and doc.resource_type != q.resource_filter:
            return False
        return True

    def retrieve(self, q: QueryExpr) -> list[Document]:
        """All matching documents, ordered by stable document id."""
        self._check_query(q)
        return [
            self.documents[did]
            for did in sorted(self.documents)
            if self._matches(self.documents[did], q)
        ]

    # ---------------------------------------------------- query builder

    def build_query(self, com_terms) -> QueryExpr:
        """Assemble the query from grounded facet atoms, in grounding order.

        ``com_terms`` is the sequence of grounded atoms, oldest first.
        Keywords become conjuncts; a subheading attaches to the most
        recently grounded keyword before it (or the last keyword overall
        when it precedes every keyword); the latest meta term and
        resource type become filters.
        """
        conjuncts: list[tuple[str, str | None]] = []
        orphan_subheadings: list[str] = []
        meta_filter: str | None = None
        resource_filter: str | None = None
        for atom in com_terms:
            if not isinstance(atom, Proposition) or len(atom.args) != 1:
                continue
            arg = str(atom.args[0])
            if atom.predicate == "keyword":
                conjuncts.append((arg, None))
            elif atom.predicate == "subheading":
                if conjuncts:
                    k, _ = conjuncts[-1]
                    conjuncts[-1] = (k, arg)
                else:
                    orphan_subheadings.append(arg)
            elif atom.predicate == "metaTerm":
                meta_filter = arg
            elif atom.predicate == "resourceType":
                resource_filter = arg
        if conjuncts and orphan_subheadings:
            k, s = conjuncts[-1]
            if s is None:
                conjuncts[-1] = (k, orphan_subheadings[-1])
        if not conjuncts:
            raise QueryNotBuildable("no keyword in common ground")
        q = QueryExpr(tuple(conjuncts), meta_filter, resource_filter)
        self._check_query(q)
        return q

    # ------------------------------------------------- expand / refine

    def expand_query(self, q: QueryExpr) -> list[tuple[QueryExpr, Proposition]]:
        """Broadening transforms, strongest-priority first.

        Every candidate retrieves a superset of the current result; the
        ones that provably change nothing on this corpus are dropped.
        Priority: drop a subheading, replace a keyword by a hyperonym,
        drop the resource filter, drop a conjunct, drop the meta filter.
        Each candidate pairs with an edit atom naming the transform,
        ready to be put on the table as an offer.
        """
        self._check_query(q)
        current = {d.id for d in self.retrieve(q)}
        candidates: list[tuple[QueryExpr, Proposition]] = []

        def keep(candidate: QueryExpr, edit: Proposition) -> None:
            result = {d.id for d in self.retrieve(candidate)}
            if result > current:
                candidates.append((candidate, edit))

        for i, (k, s) in enumerate(q.conjuncts):
            if s is not None:
                conj = list(q.conjuncts)
                conj[i] = (k, None)
                keep(
                    QueryExpr(tuple(conj), q.meta_filter, q.resource_filter),
                    prop("dropSubheading", s),
                )
        for i, (k, s) in enumerate(q.conjuncts):
            for hyper in sorted(self.terms[k].broader):
                conj = list(q.conjuncts)
                conj[i] = (hyper, s)
                keep(
                    QueryExpr(tuple(conj), q.meta_filter, q.resource_filter),
                    prop("replaceKeyword", k, hyper),
                )
        if q.resource_filter is not None:
            keep(
                QueryExpr(q.conjuncts, q.meta_filter, None),
                prop("dropResourceType", q.resource_filter),
            )
        if len(q.conjuncts) > 1:
            for i, (k, s) in enumerate(q.conjuncts):
                conj = list(q.conjuncts)
                del conj[i]
                keep(
                    QueryExpr(tuple(conj), q.meta_filter, q.resource_filter),
                    prop("dropKeyword", k),
                )
        if q.meta_filter is not None:
            keep(
                QueryExpr(q.conjuncts, None, q.resource_filter),
                prop("dropMetaTerm", q.meta_filter),
            )
        return candidates

    def refine_query(self, q: QueryExpr, com_terms=()) -> list[tuple[QueryExpr, Proposition]]:
        """Narrowing transforms, strongest-priority first.

        Every candidate retrieves a strict, non-empty subset of the
        current result.  Priority: replace a keyword by a hyponym,
        attach a subheading, attach a meta filter, attach a resource
        filter, add a conjunct from common ground.
        """
        self._check_query(q)
        current_docs = self.retrieve(q)
        current = {d.id for d in current_docs}
        candidates: list[tuple[QueryExpr, Proposition]] = []

        def keep(candidate: QueryExpr, edit: Proposition) -> None:
            result = {d.id for d in self.retrieve(candidate)}
            if result and result < current:
                candidates.append((candidate, edit))

        for i, (k, s) in enumerate(q.conjuncts):
            for hypo in sorted(self.terms[k].narrower):
                conj = list(q.conjuncts)
                conj[i] = (hypo, s)
                keep(
                    QueryExpr(tuple(conj), q.meta_filter, q.resource_filter),
                    prop("replaceKeyword", k, hypo),
                )
        for i, (k, s) in enumerate(q.conjuncts):
            if s is None:
                for sub in self._cooccurring_subheadings(current_docs):
                    conj = list(q.conjuncts)
                    conj[i] = (k, sub)
                    keep(
                        QueryExpr(tuple(conj), q.meta_filter, q.resource_filter),
                        prop("attachSubheading", sub),
                    )
        if q.meta_filter is None:
            for meta in self._cooccurring_metas(current_docs, q):
                keep(
                    QueryExpr(q.conjuncts, meta, q.resource_filter),
                    prop("attachMetaTerm", meta),
                )
        if q.resource_filter is None:
            for rt in self._cooccurring_resource_types(current_docs):
                keep(
                    QueryExpr(q.conjuncts, q.meta_filter, rt),
                    prop("attachResourceType", rt),
                )
        present = {k for k, _ in q.conjuncts}
        for atom in com_terms:
            if (
                isinstance(atom, Proposition)
                and atom.predicate == "keyword"
                and len(atom.args) == 1
                and str(atom.args[0]) not in present
            ):
                keep(
                    QueryExpr(
                        q.conjuncts + ((str(atom.args[0]), None),),
                        q.meta_filter,
                        q.resource_filter,
                    ),
                    prop("addKeyword", str(atom.args[0])),
                )
        return candidates

    # Facet values observed in a result list, most common first; ties
    # break on term id so candidate order is reproducible.
    def _rank(self, counts: dict[str, int]) -> list[str]:
        return sorted(counts, key=lambda t: (-counts[t], t))

    def _cooccurring_subheadings(self, docs) -> list[str]:
        counts: dict[str, int] = {}
        for doc in docs:
            for s in doc.subheadings:
                counts[s] = counts.get(s, 0) + 1
        return self._rank(counts)

    def _cooccurring_metas(self, docs, q: QueryExpr) -> list[str]:
        implied = self.implied_metas(q)
        counts: dict[str, int] = {}
        for doc in docs:
            metas: set[str] = set()
            for kid in doc.keywords:
                if kid in self.terms:
                    metas |= self.terms[kid].meta_parents
            for m in metas - implied:
                counts[m] = counts.get(m, 0) + 1
        return self._rank(counts)

    def _cooccurring_resource_types(self, docs) -> list[str]:
        counts: dict[str, int] = {}
        for doc in docs:
            if doc.resource_type:
                counts[doc.resource_type] = counts.get(doc.resource_type, 0) + 1
        return self._rank(counts)

    def implied_metas(self, q: QueryExpr) -> frozenset[str]:
        """Meta parents of the query's own keywords; filtering on these
        cannot narrow anything."""
        implied: set[str] = set()
        for k, _ in q.conjuncts:
            implied |= self.terms[k].meta_parents
        return frozenset(implied)

    # ------------------------------------------------------ suggestion

    def suggest(self, pattern: str, pool) -> SuggestSuccess | SuggestFailure:
        """Search candidates with the given property among pool items.

        The pool mixes raw strings and atoms from common ground or
        belief (term mentions, established keywords, result documents).
        Candidates come back as atoms ready to ground; Failure when the
        search finds nothing.
        """
        if pattern not in SUGGEST_PATTERNS:
            raise TaskModelError("unknown suggestion pattern %r" % pattern)
        strings, keywords, doc_ids = self._split_pool(pool)
        out: list[Proposition] = []
        if pattern == "keyword":
            for text in strings:
                term = self.lookup_surface(text)
                if term is not None and term.kind is TermKind.KEYWORD:
                    out.append(prop("keyword", term.id))
            for kid in keywords:
                out.append(prop("keyword", kid))
        elif pattern == "metaTerm":
            matched = list(keywords)
            for text in strings:
                term = self.lookup_surface(text)
                if term is not None and term.kind is TermKind.KEYWORD:
                    matched.append(term.id)
            counts: dict[str, int] = {}
            for kid in matched:
                for m in self.terms[kid].meta_parents:
                    counts[m] = counts.get(m, 0) + 1
            for did in doc_ids:
                doc = self.documents.get(did)
                if doc is None:
                    continue
                metas: set[str] = set()
                for kid in doc.keywords:
                    if kid in self.terms:
                        metas |= self.terms[kid].meta_parents
                for m in metas:
                    counts[m] = counts.get(m, 0) + 1
            out.extend(prop("metaTerm", m) for m in self._rank(counts))
        elif pattern == "subheading":
            docs = [self.documents[d] for d in doc_ids if d in self.documents]
            if not docs:
                # Fall back to the index slice under the pool keywords.
                closure: set[str] = set()
                for kid in keywords:
                    closure |= self.descendants(kid)
                docs = [
                    doc
                    for doc in self.documents.values()
                    if doc.keywords & closure
                ]
            out.extend(
                prop("subheading", s) for s in self._cooccurring_subheadings(docs)
            )
        elif pattern == "specificTerm":
            for kid in keywords:
                for hypo in sorted(self.terms[kid].narrower):
                    out.append(prop("keyword", hypo))
        elif pattern == "interesting":
            out.extend(prop("interesting", did) for did in doc_ids)
        deduped: list[Proposition] = []
        for p in out:
            if p not in deduped:
                deduped.append(p)
        if not deduped:
            return SuggestFailure()
        return SuggestSuccess(tuple(deduped))

    def _split_pool(self, pool) -> tuple[list[str], list[str], list[str]]:
        strings: list[str] = []
        keywords: list[str] = []
        doc_ids: list[str] = []
        for item in pool:
            if isinstance(item, str):
                strings.append(item)
            elif isinstance(item, Proposition) and len(item.args) == 1:
                arg = str(item.args[0])
                if item.predicate == "term":
                    strings.append(arg)
                elif item.predicate == "keyword":
                    if (
                        arg in self.terms
                        and self.terms[arg].kind is TermKind.KEYWORD
                    ):
                        keywords.append(arg)
                elif item.predicate == "document":
                    doc_ids.append(arg)
        return strings, keywords, doc_ids

    # ------------------------------------------------------- iteration

    def get_nb_documents(self, doc_ids) -> int:
        return len(set(doc_ids))

    def member_next(self, doc_ids, cursor: int) -> tuple[Document, int]:
        """Next document in stable id order; raises EndOfList when done."""
        ordered = sorted(set(doc_ids))
        if cursor >= len(ordered):
            raise EndOfList()
        did = ordered[cursor]
        if did not in self.documents:
            raise UnknownTermError("unknown document id %r" % did)
        return self.documents[did], cursor + 1

    def definition_of(self, term_id: str) -> str | None:
        term = self.terms.get(term_id)
        if term is None or not term.definition:
            return None
        return term.definition


# -------------------------------------------------------------- loading


@dataclass
class ValidationReport:
    term_count: int = 0
    document_count: int = 0
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


_KIND_BY_NAME = {k.value: k for k in TermKind}


def _read_records(path: str) -> list[dict]:
    records: list[dict] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise TaskModelError("%s line %d: %s" % (path, lineno, exc)) from exc
    return records


def terms_from_records(records) -> tuple[dict[str, Term], list[str]]:
    errors: list[str] = []
    raw: dict[str, dict] = {}
    for rec in records:
        tid = rec.get("id")
        if not tid:
            errors.append("term record without id: %r" % rec)
            continue
        if tid in raw:
            errors.append("duplicate term id %r" % tid)
            continue
        if rec.get("kind") not in _KIND_BY_NAME:
            errors.append("term %r has unknown kind %r" % (tid, rec.get("kind")))
            continue
        raw[tid] = rec

    narrower: dict[str, set[str]] = {tid: set() for tid in raw}
    for tid, rec in raw.items():
        for parent in rec.get("broader", []):
            if parent not in raw:
                errors.append("term %r: dangling broader id %r" % (tid, parent))
            elif raw[parent]["kind"] != "keyword" or rec["kind"] != "keyword":
                errors.append("term %r: broader links join keywords only" % tid)
            else:
                narrower[parent].add(tid)
        for meta in rec.get("meta_parents", []):
            if meta not in raw:
                errors.append("term %r: dangling meta parent %r" % (tid, meta))
            elif raw[meta]["kind"] != "metaTerm":
                errors.append("term %r: meta parent %r is not a meta term" % (tid, meta))
        if rec.get("meta_parents") and rec["kind"] != "keyword":
            errors.append("term %r: meta_parents only apply to keywords" % tid)

    # Cycle check over broader edges among keywords.
    state: dict[str, int] = {}

    def visit(tid: str, trail: tuple[str, ...]) -> None:
        mark = state.get(tid, 0)
        if mark == 1:
            errors.append("hierarchy cycle through %s" % " -> ".join(trail + (tid,)))
            return
        if mark == 2:
            return
        state[tid] = 1
        for parent in raw[tid].get("broader", []):
            if parent in raw:
                visit(parent, trail + (tid,))
        state[tid] = 2

    for tid in raw:
        visit(tid, ())

    terms = {
        tid: Term(
            id=tid,
            label=rec.get("label", tid),
            kind=_KIND_BY_NAME[rec["kind"]],
            synonyms=frozenset(rec.get("synonyms", [])),
            broader=frozenset(p for p in rec.get("broader", []) if p in raw),
            narrower=frozenset(narrower.get(tid, ())),
            meta_parents=frozenset(m for m in rec.get("meta_parents", []) if m in raw),
            definition=rec.get("definition", ""),
        )
        for tid, rec in raw.items()
    }
    return terms, errors


def documents_from_records(records, terms: dict[str, Term]) -> tuple[dict[str, Document], list[str]]:
    errors: list[str] = []
    documents: dict[str, Document] = {}

    def right_kind(tid: str, kind: TermKind) -> bool:
        return tid in terms and terms[tid].kind is kind

    for rec in records:
        did = rec.get("id")
        if not did:
            errors.append("document record without id: %r" % rec)
            continue
        if did in documents:
            errors.append("duplicate document id %r" % did)
            continue
        for kid in rec.get("keywords", []):
            if not right_kind(kid, TermKind.KEYWORD):
                errors.append("document %r: bad keyword %r" % (did, kid))
        for sid in rec.get("subheadings", []):
            if not right_kind(sid, TermKind.SUBHEADING):
                errors.append("document %r: bad subheading %r" % (did, sid))
        rt = rec.get("resource_type")
        if rt is not None and not right_kind(rt, TermKind.RESOURCE_TYPE):
            errors.append("document %r: bad resource type %r" % (did, rt))
        documents[did] = Document(
            id=did,
            title=rec.get("title", did),
            keywords=frozenset(rec.get("keywords", [])),
            subheadings=frozenset(rec.get("subheadings", [])),
            resource_type=rt,
            description=rec.get("description", ""),
            url=rec.get("url", ""),
        )
    return documents, errors


def load_store(terminology_path: str, documents_path: str) -> tuple[FacetStore, ValidationReport]:
    term_records = _read_records(terminology_path)
    doc_records = _read_records(documents_path)
    terms, term_errors = terms_from_records(term_records)
    documents, doc_errors = documents_from_records(doc_records, terms)
    report = ValidationReport(
        term_count=len(terms),
        document_count=len(documents),
        errors=term_errors + doc_errors,
    )
    return FacetStore(terms, documents), report


def default_fixture_paths() -> tuple[str, str]:
    """Paths of the packaged desk corpus (terminology, documents)."""
    base = resources.files("faceted_dialog").joinpath("data")
    return str(base / "terminology.jsonl"), str(base / "documents.jsonl")


def load_default_store() -> FacetStore:
    tpath, dpath = default_fixture_paths()
    store, report = load_store(tpath, dpath)
    if not report.ok:
        raise TaskModelError("packaged corpus is invalid: %s" % "; ".join(report.errors))
    return store
