import random

import pytest

from faceted_dialog.task_model import (
    FacetStore,
    documents_from_records,
    load_default_store,
    terms_from_records,
)


@pytest.fixture(scope="session")
def store() -> FacetStore:
    return load_default_store()


def make_random_corpus(rng: random.Random) -> FacetStore:
    """A small well-formed corpus: a keyword tree with synonyms, a few
    subheadings / meta terms / resource types, and documents tagged
    from those vocabularies.  Goes through the record loaders so the
    same validation applies as for shipped data."""
    n_keywords = rng.randint(4, 12)
    n_subheadings = rng.randint(2, 4)
    n_metas = rng.randint(2, 3)
    n_resources = rng.randint(2, 3)
    records = []
    subheadings = ["sub%d" % i for i in range(n_subheadings)]
    metas = ["meta%d" % i for i in range(n_metas)]
    resources = ["res%d" % i for i in range(n_resources)]
    for sid in subheadings:
        records.append({"id": sid, "kind": "subheading", "label": sid})
    for mid in metas:
        records.append({"id": mid, "kind": "metaTerm", "label": mid})
    for rid in resources:
        records.append({"id": rid, "kind": "resourceType", "label": rid})
    keywords = ["kw%d" % i for i in range(n_keywords)]
    for i, kid in enumerate(keywords):
        # parents only among earlier keywords keeps the hierarchy acyclic
        broader = []
        if i > 0 and rng.random() < 0.6:
            broader = [keywords[rng.randrange(i)]]
        records.append(
            {
                "id": kid,
                "kind": "keyword",
                "label": kid,
                "broader": broader,
                "meta_parents": rng.sample(metas, rng.randint(0, 2)),
                "synonyms": ["alias %s" % kid] if rng.random() < 0.3 else [],
            }
        )
    terms, term_errors = terms_from_records(records)
    assert term_errors == []
    doc_records = []
    for d in range(rng.randint(10, 40)):
        doc_records.append(
            {
                "id": "d%02d" % d,
                "title": "Document %d" % d,
                "keywords": rng.sample(keywords, rng.randint(1, min(3, n_keywords))),
                "subheadings": rng.sample(subheadings, rng.randint(0, 2)),
                "resource_type": rng.choice(resources + [None]),
            }
        )
    documents, doc_errors = documents_from_records(doc_records, terms)
    assert doc_errors == []
    return FacetStore(terms, documents)
