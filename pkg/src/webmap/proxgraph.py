"""Per-peer term proximity graph: construction, incremental update, paths.

Edges hold the full (optionally windowed) history of observed cosine
similarities; the weight is always the mean of the retained window. New
edges are only admitted above the similarity threshold s, while existing
edges may drift below it through averaging.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from heapq import heappop, heappush
from pathlib import Path

from .embedding import (
    EmbeddingProvider,
    Occurrence,
    averaged_term_embedding,
    cosine,
    embed_occurrence,
)
from .errors import EmptyInput, EmptySources, NotFound, NotReachable

# Resolution floor for converted edge distances; keeps Dijkstra strictly
# positive even for weight-1.0 edges.
MIN_EDGE_DISTANCE = 1e-6

DEFAULT_STOPWORDS = frozenset(
    """
    about after all also and any are because been before but can could did
    does for from had has have her him his how into its just like more most
    not now off one only other our out over said she some such than that the
    their them then there these they this those through too two under very
    was way were what when where which while who will with would you your
    """.split()
)

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")
_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class TermSelector:
    """Settings for the noun-ish term selection heuristic."""

    stopwords: frozenset[str] = DEFAULT_STOPWORDS
    allowlist: frozenset[str] | None = None

    @classmethod
    def from_allowlist_file(cls, path: str | Path) -> "TermSelector":
        terms = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    terms.append(line)
        return cls(allowlist=frozenset(terms))


@dataclass
class Document:
    """A peer-local document with its selected term occurrences."""

    id: str
    url: str
    title: str
    sentences: list[str]
    selected_terms: list[Occurrence]

    def distinct_terms(self) -> list[str]:
        return sorted({occ.term for occ in self.selected_terms})


def split_sentences(text: str) -> list[str]:
    return [s.strip() for s in _SENTENCE_SPLIT.split(text.strip()) if s.strip()]


def select_terms(
    text: str,
    selector: TermSelector | None = None,
    *,
    doc_id: str,
    url: str = "",
    title: str = "",
) -> Document:
    """Split text into sentences and pick term occurrences.

    Default heuristic: lowercase-folded tokens of length >= 3 outside the
    stopword list; tokens capitalized mid-sentence are kept verbatim as
    proper-noun candidates. An allowlist, when present, replaces the
    heuristic wholesale.
    """
    if not text or not text.strip():
        raise EmptyInput("document text is empty")
    return select_from_sentences(
        split_sentences(text), selector, doc_id=doc_id, url=url, title=title
    )


def select_from_sentences(
    sentences: list[str],
    selector: TermSelector | None = None,
    *,
    doc_id: str,
    url: str = "",
    title: str = "",
) -> Document:
    """Term selection over an already-split sentence list (the persisted
    document form)."""
    selector = selector or TermSelector()
    allow = None
    if selector.allowlist is not None:
        allow = {t.lower(): t for t in selector.allowlist}

    occurrences: list[Occurrence] = []
    for idx, sentence in enumerate(sentences):
        for pos, token in enumerate(_TOKEN.findall(sentence)):
            if allow is not None:
                canonical = allow.get(token.lower())
                if canonical is None:
                    continue
                term = canonical
            else:
                if pos > 0 and token[:1].isupper():
                    term = token
                else:
                    term = token.lower()
                if len(term) < 3 or term.lower() in selector.stopwords:
                    continue
            occurrences.append(
                Occurrence(
                    term=term,
                    doc_id=doc_id,
                    sentence_index=idx,
                    context_window=sentence,
                )
            )
    return Document(
        id=doc_id,
        url=url,
        title=title,
        sentences=sentences,
        selected_terms=occurrences,
    )


@dataclass(frozen=True)
class SimilarityPair:
    """Observed similarity between two distinct terms."""

    term_a: str
    term_b: str
    similarity: float


@dataclass
class ProxGraphConfig:
    """Graph growth knobs: threshold s, history cap t, pair approach."""

    s: float = 0.5
    t: int | None = None  # None = unbounded history
    approach: str = "B"
    selector: TermSelector = field(default_factory=TermSelector)

    def __post_init__(self) -> None:
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"threshold s must lie in (0, 1), got {self.s}")
        if self.t is not None and self.t < 1:
            raise ValueError(f"history cap t must be >= 1, got {self.t}")
        if self.approach not in ("A", "B"):
            raise ValueError(f"approach must be 'A' or 'B', got {self.approach!r}")


@dataclass
class EdgeRecord:
    weight: float
    history: list[float]


@dataclass
class UpdateReport:
    edges_added: int = 0
    edges_updated: int = 0
    pairs_rejected: int = 0


def _edge_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


class TermProximityGraph:
    """Undirected weighted term graph with per-edge similarity history."""

    def __init__(self) -> None:
        self.nodes: set[str] = set()
        self.edges: dict[tuple[str, str], EdgeRecord] = {}
        self._adjacency: dict[str, set[str]] = {}

    def __contains__(self, term: str) -> bool:
        return term in self.nodes

    def has_edge(self, a: str, b: str) -> bool:
        return _edge_key(a, b) in self.edges

    def edge(self, a: str, b: str) -> EdgeRecord:
        return self.edges[_edge_key(a, b)]

    def neighbors(self, term: str) -> set[str]:
        return self._adjacency.get(term, set())

    def degree(self, term: str) -> int:
        return len(self._adjacency.get(term, ()))

    def add_node(self, term: str) -> None:
        self.nodes.add(term)
        self._adjacency.setdefault(term, set())

    def _add_edge(self, a: str, b: str, record: EdgeRecord) -> None:
        self.add_node(a)
        self.add_node(b)
        self.edges[_edge_key(a, b)] = record
        self._adjacency[a].add(b)
        self._adjacency[b].add(a)

    def to_dict(self) -> dict:
        return {
            "nodes": sorted(self.nodes),
            "edges": [
                {
                    "a": a,
                    "b": b,
                    "weight": rec.weight,
                    "history": list(rec.history),
                }
                for (a, b), rec in sorted(self.edges.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TermProximityGraph":
        graph = cls()
        for node in data.get("nodes", []):
            graph.add_node(node)
        for edge in data.get("edges", []):
            graph._add_edge(
                edge["a"],
                edge["b"],
                EdgeRecord(weight=edge["weight"], history=list(edge["history"])),
            )
        return graph

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "TermProximityGraph":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def pairs_approach_a(
    provider: EmbeddingProvider, doc: Document
) -> list[SimilarityPair]:
    """Whole-document term representations: one averaged embedding per term,
    then cosine over every unordered pair of distinct terms."""
    by_term: dict[str, list[Occurrence]] = {}
    for occ in doc.selected_terms:
        by_term.setdefault(occ.term, []).append(occ)
    terms = sorted(by_term)
    if len(terms) < 2:
        return []
    averaged = {t: averaged_term_embedding(provider, by_term[t]) for t in terms}
    pairs = []
    for i, a in enumerate(terms):
        for b in terms[i + 1 :]:
            pairs.append(SimilarityPair(a, b, cosine(averaged[a], averaged[b])))
    return pairs


def pairs_approach_b(
    provider: EmbeddingProvider, doc: Document
) -> list[SimilarityPair]:
    """Sentence-local comparisons: cosine per co-occurrence, then the mean
    over every sentence in which the pair appears together."""
    by_sentence: dict[int, dict[str, Occurrence]] = {}
    for occ in doc.selected_terms:
        by_sentence.setdefault(occ.sentence_index, {}).setdefault(occ.term, occ)
    observed: dict[tuple[str, str], list[float]] = {}
    for idx in sorted(by_sentence):
        in_sentence = by_sentence[idx]
        terms = sorted(in_sentence)
        for i, a in enumerate(terms):
            va = embed_occurrence(provider, in_sentence[a])
            for b in terms[i + 1 :]:
                vb = embed_occurrence(provider, in_sentence[b])
                observed.setdefault(_edge_key(a, b), []).append(cosine(va, vb))
    return [
        SimilarityPair(a, b, sum(sims) / len(sims))
        for (a, b), sims in sorted(observed.items())
    ]


def update_graph(
    graph: TermProximityGraph,
    pairs: list[SimilarityPair],
    cfg: ProxGraphConfig,
) -> UpdateReport:
    """Fold similarity observations into the graph.

    Existing edges always absorb the observation (window-capped mean, which
    may sink below s); new edges are created only above the threshold.
    """
    report = UpdateReport()
    for pair in pairs:
        if pair.term_a == pair.term_b:
            report.pairs_rejected += 1
            continue
        key = _edge_key(pair.term_a, pair.term_b)
        record = graph.edges.get(key)
        if record is not None:
            record.history.append(pair.similarity)
            if cfg.t is not None:
                del record.history[: max(0, len(record.history) - cfg.t)]
            record.weight = sum(record.history) / len(record.history)
            report.edges_updated += 1
        elif pair.similarity > cfg.s:
            graph._add_edge(
                pair.term_a,
                pair.term_b,
                EdgeRecord(weight=pair.similarity, history=[pair.similarity]),
            )
            report.edges_added += 1
        else:
            report.pairs_rejected += 1
    return report


def edge_distance(weight: float) -> float:
    """Convert a similarity weight into a path distance in [1e-6, 1]."""
    return min(1.0, max(MIN_EDGE_DISTANCE, 1.0 - weight))


def shortest_path(
    graph: TermProximityGraph, sources: set[str], target: str
) -> list[str]:
    """Minimum-distance path from any source to the target.

    Ties fall to fewer hops, then to the lexicographically smallest term
    sequence; both are enforced by ordering heap entries on the full
    (distance, hops, path) triple.
    """
    if not sources:
        raise EmptySources("shortest_path requires at least one source")
    missing = sorted(t for t in set(sources) | {target} if t not in graph.nodes)
    if missing:
        raise NotFound(f"terms not in graph: {missing}")

    heap: list[tuple[float, int, tuple[str, ...]]] = []
    for source in sorted(sources):
        heappush(heap, (0.0, 1, (source,)))
    settled: set[str] = set()
    while heap:
        dist, hops, path = heappop(heap)
        node = path[-1]
        if node in settled:
            continue
        settled.add(node)
        if node == target:
            return list(path)
        for neighbor in sorted(graph.neighbors(node)):
            if neighbor in settled:
                continue
            step = edge_distance(graph.edge(node, neighbor).weight)
            heappush(heap, (dist + step, hops + 1, path + (neighbor,)))
    raise NotReachable(f"no path from {sorted(sources)} to {target!r}")


def distance_map(graph: TermProximityGraph, source: str) -> dict[str, float]:
    """Single-source Dijkstra distances over d = 1 - weight."""
    if source not in graph.nodes:
        raise NotFound(f"term not in graph: {source!r}")
    dist: dict[str, float] = {source: 0.0}
    heap: list[tuple[float, str]] = [(0.0, source)]
    settled: set[str] = set()
    while heap:
        d, node = heappop(heap)
        if node in settled:
            continue
        settled.add(node)
        for neighbor in graph.neighbors(node):
            nd = d + edge_distance(graph.edge(node, neighbor).weight)
            if nd < dist.get(neighbor, float("inf")):
                dist[neighbor] = nd
                heappush(heap, (nd, neighbor))
    return dist
