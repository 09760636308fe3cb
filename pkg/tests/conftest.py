from __future__ import annotations

import random

from citegraph.corpus import (
    AuthorshipRecord,
    CitationEdge,
    CorpusIndex,
    DocType,
    FieldTaxonomy,
    PaperRecord,
    SubfieldInfo,
    build_index,
)

TAXONOMY_ROWS = [
    ("102", "nuclear & particle physics", "F18", "Physics & Astronomy"),
    ("103", "astrophysics", "F18", "Physics & Astronomy"),
    ("201", "organic chemistry", "F05", "Chemistry"),
    ("202", "polymer science", "F05", "Chemistry"),
    ("301", "cardiology", "F06", "Clinical Medicine"),
]


def tiny_taxonomy() -> FieldTaxonomy:
    return FieldTaxonomy(SubfieldInfo(*row) for row in TAXONOMY_ROWS)


def make_index(papers, authorships, citations, taxonomy=None) -> CorpusIndex:
    """Index from terse tuples: papers (pid, doc_type, subfield), ships (pid, aid), edges (citing, cited)."""
    return build_index(
        [PaperRecord(p, d if isinstance(d, DocType) else DocType.from_string(d), s) for p, d, s in papers],
        [AuthorshipRecord(p, a) for p, a in authorships],
        [CitationEdge(u, v) for u, v in citations],
        taxonomy or tiny_taxonomy(),
    )


def random_corpus(rng: random.Random, max_authors: int = 50, max_edges: int = 300) -> CorpusIndex:
    """Small random corpus for property tests; drawn entirely from rng."""
    n_authors = rng.randint(2, max_authors)
    authors = [f"a{i:02d}" for i in range(n_authors)]
    doc_types = [DocType.ARTICLE] * 8 + [DocType.REVIEW, DocType.OTHER]
    subfields = [row[0] for row in TAXONOMY_ROWS] + [None]

    papers = []
    ships = []
    n_papers = rng.randint(n_authors, max(n_authors, min(120, 3 * n_authors)))
    for j in range(n_papers):
        pid = f"p{j:03d}"
        papers.append((pid, rng.choice(doc_types), rng.choice(subfields)))
        for a in rng.sample(authors, k=min(rng.choice((1, 1, 1, 2, 2, 3)), n_authors)):
            ships.append((pid, a))

    edges = []
    for _ in range(rng.randint(0, max_edges)):
        u = f"p{rng.randrange(n_papers):03d}"
        v = f"p{rng.randrange(n_papers):03d}"
        if u != v:
            edges.append((u, v))
    return make_index(papers, ships, edges)


def brute_force_h(counts) -> int:
    """Definitional h-index check: largest h with at least h entries >= h."""
    values = list(counts)
    for h in range(min(len(values), max(values, default=0)), -1, -1):
        if sum(1 for c in values if c >= h) >= h:
            return h
    return 0
