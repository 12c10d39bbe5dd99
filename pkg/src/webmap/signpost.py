"""Intra-cluster semantic signposts.

Per document: a directed term association graph whose edges weight the
HITS update rules, yielding keywords (authorities) and source topics
(hubs). Across documents: links from a document to those whose source
topics it primarily addresses, plus a greedy topic trace along them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embedding import EmbeddingProvider, averaged_term_embedding, cosine
from .errors import NotFound
from .proxgraph import Document

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1000
DEFAULT_MIN_ASSN = 0.05
DEFAULT_TOP_K = 10
DEFAULT_LINK_THETA = 0.3


@dataclass
class TermAssociationGraph:
    """Directed, document-specific term graph with positive Assn weights."""

    doc_id: str
    nodes: list[str] = field(default_factory=list)
    edges: dict[tuple[str, str], float] = field(default_factory=dict)
    degenerate: bool = False  # fewer than two distinct terms

    def assn(self, a: str, b: str) -> float:
        return self.edges.get((a, b), 0.0)


@dataclass
class HitsScores:
    doc_id: str
    authority: dict[str, float]
    hub: dict[str, float]
    iterations: int
    converged: bool


@dataclass(frozen=True)
class DocLink:
    from_doc: str
    to_doc: str
    overlap_score: float


def build_term_association_graph(
    doc: Document,
    provider: EmbeddingProvider,
    min_assn: float = DEFAULT_MIN_ASSN,
) -> TermAssociationGraph:
    """Directed associations from sentence co-occurrence.

    Assn(a -> b) = max(0, cos(avg_a, avg_b)) * |sentences with a and b| /
    |sentences with a|, kept when above min_assn. The conditional factor
    makes the graph asymmetric: a term points strongly at companions that
    shadow it everywhere, weakly at ones it rarely meets.
    """
    occs_by_term: dict[str, list] = {}
    sentences_by_term: dict[str, set[int]] = {}
    for occ in doc.selected_terms:
        occs_by_term.setdefault(occ.term, []).append(occ)
        sentences_by_term.setdefault(occ.term, set()).add(occ.sentence_index)
    terms = sorted(occs_by_term)
    graph = TermAssociationGraph(doc_id=doc.id, nodes=terms)
    if len(terms) < 2:
        graph.degenerate = True
        return graph

    averaged = {t: averaged_term_embedding(provider, occs_by_term[t]) for t in terms}
    for i, a in enumerate(terms):
        sa = sentences_by_term[a]
        for b in terms[i + 1 :]:
            sb = sentences_by_term[b]
            both = len(sa & sb)
            if both == 0:
                continue
            sim = max(0.0, cosine(averaged[a], averaged[b]))
            assn_ab = sim * both / len(sa)
            assn_ba = sim * both / len(sb)
            if assn_ab > min_assn:
                graph.edges[(a, b)] = assn_ab
            if assn_ba > min_assn:
                graph.edges[(b, a)] = assn_ba
    return graph


def weighted_hits(
    g: TermAssociationGraph,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> HitsScores:
    """Assn-weighted HITS with per-iteration L2 normalization.

    Authorities are refreshed from the previous hubs, hubs from the new
    authorities (sequential update order), until the largest component
    change of both vectors drops below tol.
    """
    nodes = sorted(g.nodes)
    n = len(nodes)
    if n == 0 or not g.edges:
        zeros = {t: 0.0 for t in nodes}
        return HitsScores(g.doc_id, dict(zeros), dict(zeros), 0, True)

    index = {t: i for i, t in enumerate(nodes)}
    weights = np.zeros((n, n))
    for (a, b), assn in g.edges.items():
        weights[index[a], index[b]] = assn

    a_vec = np.full(n, 1.0 / np.sqrt(n))
    h_vec = np.full(n, 1.0 / np.sqrt(n))
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        a_new = weights.T @ h_vec
        norm = np.linalg.norm(a_new)
        if norm > 0:
            a_new /= norm
        h_new = weights @ a_new
        norm = np.linalg.norm(h_new)
        if norm > 0:
            h_new /= norm
        delta = max(np.abs(a_new - a_vec).max(), np.abs(h_new - h_vec).max())
        a_vec, h_vec = a_new, h_new
        if delta < tol:
            converged = True
            break
    return HitsScores(
        doc_id=g.doc_id,
        authority={t: float(a_vec[index[t]]) for t in nodes},
        hub={t: float(h_vec[index[t]]) for t in nodes},
        iterations=iterations,
        converged=converged,
    )


def _ranked(scores: dict[str, float], k: int) -> list[tuple[str, float]]:
    ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return ordered[:k]


def top_keywords_and_sources(
    scores: HitsScores, k: int
) -> tuple[list[tuple[str, float]], list[tuple[str, float]]]:
    """Top-k authorities (keywords) and hubs (source topics), score-descending
    with lexicographic tie-break."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return _ranked(scores.authority, k), _ranked(scores.hub, k)


def induce_document_links(
    per_doc_scores: dict[str, HitsScores],
    k: int = DEFAULT_TOP_K,
    theta: float = DEFAULT_LINK_THETA,
) -> list[DocLink]:
    """Directed document links: A -> B when A's top keywords overlap B's
    source topics by at least theta (as a fraction of k)."""
    doc_ids = sorted(per_doc_scores)
    top_auth = {
        d: {t for t, _ in _ranked(per_doc_scores[d].authority, k)} for d in doc_ids
    }
    top_hub = {
        d: {t for t, _ in _ranked(per_doc_scores[d].hub, k)} for d in doc_ids
    }
    links = []
    for a in doc_ids:
        for b in doc_ids:
            if a == b:
                continue
            overlap = len(top_auth[a] & top_hub[b]) / k
            if overlap >= theta:
                links.append(DocLink(from_doc=a, to_doc=b, overlap_score=overlap))
    return links


def trace_topic(
    start_doc: str,
    doc_links: list[DocLink],
    max_depth: int,
    known_docs: set[str] | None = None,
) -> list[str]:
    """Greedy walk toward topical origins.

    Each hop follows the strongest outgoing link (ties to the smaller
    doc id) and stops at max_depth, at a dead end, or on revisiting a
    document.
    """
    if known_docs is not None and start_doc not in known_docs:
        raise NotFound(f"unknown document {start_doc!r}")
    outgoing: dict[str, list[DocLink]] = {}
    for link in doc_links:
        outgoing.setdefault(link.from_doc, []).append(link)
    chain = [start_doc]
    visited = {start_doc}
    current = start_doc
    for _ in range(max_depth):
        candidates = outgoing.get(current)
        if not candidates:
            break
        best = min(candidates, key=lambda l: (-l.overlap_score, l.to_doc))
        if best.to_doc in visited:
            break
        chain.append(best.to_doc)
        visited.add(best.to_doc)
        current = best.to_doc
    return chain
