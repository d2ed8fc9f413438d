"""Store, retrieval, verdicts, query edits.

Corpus-derived numbers below (result counts, first documents, edit
lists) were established with the scan oracle and are frozen; the same
oracle re-checks retrieval on every query these tests touch, plus a
randomized corpus sweep.
"""

import random

import pytest

from faceted_dialog.semantics import prop
from faceted_dialog.task_model import (
    Acceptable,
    EndOfList,
    EvaluatorConfig,
    NotEnough,
    QueryExpr,
    QueryNotBuildable,
    TermKind,
    TooMany,
    evaluate_list,
    load_default_store,
    normalize,
)
from conftest import make_random_corpus
from oracles import retrieve_oracle, verdict_oracle


def ids(docs):
    return [d.id for d in docs]


def checked_retrieve(store, query):
    """Retrieve and cross-check against the scan oracle."""
    result = store.retrieve(query)
    assert ids(result) == retrieve_oracle(store, query)
    return result


# ------------------------------------------------------- worked corpus


def test_corpus_shape(store):
    kinds = {k: 0 for k in TermKind}
    for term in store.terms.values():
        kinds[term.kind] += 1
    assert len(store.documents) == 60
    assert kinds[TermKind.KEYWORD] > 20
    assert kinds[TermKind.META_TERM] >= 5
    assert kinds[TermKind.SUBHEADING] >= 5
    assert kinds[TermKind.RESOURCE_TYPE] >= 4


def test_asthma_counts_frozen(store):
    q = QueryExpr((("asthma", None),))
    assert len(checked_retrieve(store, q)) == 34
    narrowed = QueryExpr((("asthma", None),), meta_filter="allergology")
    narrowed_docs = checked_retrieve(store, narrowed)
    assert len(narrowed_docs) == 10
    assert ids(narrowed_docs)[:3] == ["doc09", "doc10", "doc11"]


def test_parasomny_counts_frozen(store):
    base = checked_retrieve(store, QueryExpr((("parasomny", None),)))
    assert ids(base) == ["doc50", "doc51", "doc52"]
    with_sub = checked_retrieve(
        store, QueryExpr((("parasomny", "therapy"),))
    )
    assert ids(with_sub) == ["doc50"]


def test_keyword_closure_includes_narrower_terms(store):
    sleep = checked_retrieve(store, QueryExpr((("sleep_disorders", None),)))
    assert len(sleep) == 7
    narrow = set(ids(checked_retrieve(store, QueryExpr((("parasomny", None),)))))
    assert narrow <= set(ids(sleep))


def test_diabetes_is_sparse(store):
    assert len(checked_retrieve(store, QueryExpr((("diabetes", None),)))) == 1


def test_surface_lookup_and_normalization(store):
    assert store.lookup_surface("hay fever").id == "pollen_allergy"
    assert store.lookup_surface("Hay  Fever").id == "pollen_allergy"
    assert store.lookup_surface("general medicine").id == "general_medicine"
    assert store.lookup_surface("no such words") is None
    assert normalize("Crohn's  disease") == normalize("crohn's disease")


def test_retrieve_rejects_unknown_terms(store):
    with pytest.raises(ValueError):
        store.retrieve(QueryExpr((("not_a_term", None),)))
    with pytest.raises(ValueError):
        store.retrieve(QueryExpr((("asthma", "not_a_subheading"),)))


# ------------------------------------------------------- query builder


def test_build_query_orders_and_attaches(store):
    atoms = [
        prop("keyword", "asthma"),
        prop("subheading", "therapy"),
        prop("metaTerm", "allergology"),
    ]
    q = store.build_query(atoms)
    assert q.conjuncts == (("asthma", "therapy"),)
    assert q.meta_filter == "allergology"


def test_build_query_orphan_subheading_attaches_to_last_keyword(store):
    atoms = [prop("subheading", "therapy"), prop("keyword", "parasomny")]
    q = store.build_query(atoms)
    assert q.conjuncts == (("parasomny", "therapy"),)


def test_build_query_needs_a_keyword(store):
    with pytest.raises(QueryNotBuildable):
        store.build_query([prop("subheading", "therapy")])


# ------------------------------------------------------------ verdicts


def test_threshold_partition_full_range():
    cfg = EvaluatorConfig(delta_min=3, delta_max=30)
    for n in range(0, 101):
        verdict = evaluate_list(["d"] * n, cfg)
        expected = verdict_oracle(n, 3, 30)
        got = {NotEnough: "few", TooMany: "many", Acceptable: "ok"}[type(verdict)]
        assert got == expected, "n=%d" % n
        assert verdict.count == n
    assert isinstance(evaluate_list(["d"] * 3, cfg), Acceptable)
    assert isinstance(evaluate_list(["d"] * 30, cfg), Acceptable)


def test_evaluator_config_validation():
    with pytest.raises(ValueError):
        EvaluatorConfig(delta_min=5, delta_max=5)
    with pytest.raises(ValueError):
        EvaluatorConfig(delta_min=-1, delta_max=4)


# ------------------------------------------------------- expand/refine


def test_parasomny_therapy_expansions_frozen(store):
    q = QueryExpr((("parasomny", "therapy"),))
    edits = [str(edit) for _, edit in store.expand_query(q)]
    assert edits == [
        "dropSubheading(therapy)",
        "replaceKeyword(parasomny, sleep_disorders)",
    ]


def test_diabetes_has_no_expansions(store):
    assert store.expand_query(QueryExpr((("diabetes", None),))) == []


def test_asthma_refinements_lead_with_hyponyms_or_facets(store):
    q = QueryExpr((("asthma", None),))
    candidates = store.refine_query(q)
    assert candidates, "a 34-document result must be refinable"
    current = set(ids(store.retrieve(q)))
    for candidate, _ in candidates:
        got = set(ids(checked_retrieve(store, candidate)))
        assert got and got < current


def test_expansions_are_strict_supersets_on_corpus(store):
    q = QueryExpr((("parasomny", "therapy"),))
    current = set(ids(store.retrieve(q)))
    for candidate, _ in store.expand_query(q):
        got = set(ids(checked_retrieve(store, candidate)))
        assert got > current


def test_monotonicity_on_random_corpora():
    rng = random.Random(20260822)
    for round_no in range(50):
        corpus = make_random_corpus(rng)
        keywords = [
            t.id for t in corpus.terms.values() if t.kind is TermKind.KEYWORD
        ]
        for _ in range(4):
            kw = rng.choice(keywords)
            query = QueryExpr(((kw, None),))
            base = set(retrieve_oracle(corpus, query))
            assert set(ids(checked_retrieve(corpus, query))) == base
            for candidate, _ in corpus.expand_query(query):
                assert set(ids(checked_retrieve(corpus, candidate))) > base
            for candidate, _ in corpus.refine_query(query):
                narrowed = set(ids(checked_retrieve(corpus, candidate)))
                assert narrowed and narrowed < base


# ----------------------------------------------------------- list walk


def test_member_next_walks_in_stable_order(store):
    docs = ["doc51", "doc50", "doc52"]
    seen = []
    cursor = 0
    for _ in range(3):
        doc, cursor = store.member_next(docs, cursor)
        seen.append(doc.id)
    assert seen == ["doc50", "doc51", "doc52"]
    with pytest.raises(EndOfList):
        store.member_next(docs, cursor)


def test_definitions(store):
    assert store.definition_of("parasomny")
    assert store.definition_of("nonexistent_term") is None
