import json
import random

import numpy as np
import pytest

from webmap.embedding import FileProvider, Occurrence, StubProvider
from webmap.errors import NotFound
from webmap.proxgraph import Document
from webmap.signpost import (
    DocLink,
    HitsScores,
    TermAssociationGraph,
    build_term_association_graph,
    induce_document_links,
    top_keywords_and_sources,
    trace_topic,
    weighted_hits,
)

from oracles import classic_hits, weighted_hits_power_iteration


def doc_from_layout(doc_id, sentence_terms):
    """Document built from a list of per-sentence term lists."""
    sentences = [" ".join(terms) + "." for terms in sentence_terms]
    occurrences = [
        Occurrence(term=term, doc_id=doc_id, sentence_index=idx,
                   context_window=sentences[idx])
        for idx, terms in enumerate(sentence_terms)
        for term in terms
    ]
    return Document(id=doc_id, url="", title=doc_id, sentences=sentences,
                    selected_terms=occurrences)


def graph_from_edges(edges, doc_id="d"):
    nodes = sorted({n for pair in edges for n in pair})
    return TermAssociationGraph(doc_id=doc_id, nodes=nodes, edges=dict(edges))


class TestBuildAssociationGraph:
    @pytest.fixture
    def provider(self, tmp_path):
        # fixed term vectors so cos(a, b) = 0.8 exactly
        lines = [
            {"term": "alpha", "vector": [1.0, 0.0]},
            {"term": "bravo", "vector": [0.8, 0.6]},
        ]
        path = tmp_path / "vectors.jsonl"
        path.write_text("\n".join(json.dumps(l) for l in lines) + "\n")
        return FileProvider.load(path)

    def test_conditional_asymmetry(self, provider):
        # alpha in 2 sentences, bravo co-occurs in both and in 2 more
        doc = doc_from_layout("d", [
            ["alpha", "bravo"],
            ["alpha", "bravo"],
            ["bravo"],
            ["bravo"],
        ])
        graph = build_term_association_graph(doc, provider)
        assert graph.assn("alpha", "bravo") == pytest.approx(0.8, abs=1e-12)
        assert graph.assn("bravo", "alpha") == pytest.approx(0.4, abs=1e-12)

    def test_no_cooccurrence_no_edge(self, provider):
        doc = doc_from_layout("d", [["alpha"], ["bravo"]])
        graph = build_term_association_graph(doc, provider)
        assert graph.edges == {}

    def test_min_assn_prunes(self, provider):
        doc = doc_from_layout("d", [
            ["alpha", "bravo"],
            ["bravo"] * 1 + ["bravo"],  # keep bravo frequent
        ] + [["bravo"]] * 18)
        graph = build_term_association_graph(doc, provider, min_assn=0.05)
        # bravo -> alpha = 0.8 * 1/20 = 0.04 <= 0.05: pruned
        assert graph.assn("bravo", "alpha") == 0.0
        assert graph.assn("alpha", "bravo") == pytest.approx(0.8)

    def test_single_term_degenerate(self, provider):
        doc = doc_from_layout("d", [["alpha"]])
        graph = build_term_association_graph(doc, provider)
        assert graph.degenerate
        assert graph.edges == {}


class TestWeightedHits:
    def test_three_node_fanout(self):
        """q -> a1 (1.0), q -> a2 (0.5): authority ratio 2, hub all on q."""
        graph = graph_from_edges({("q", "a1"): 1.0, ("q", "a2"): 0.5})
        scores = weighted_hits(graph)
        assert scores.converged
        assert scores.authority["a1"] / scores.authority["a2"] == pytest.approx(
            2.0, abs=1e-6
        )
        assert scores.authority["a1"] == pytest.approx(0.8944, abs=1e-4)
        assert scores.authority["a2"] == pytest.approx(0.4472, abs=1e-4)
        assert scores.hub["q"] == pytest.approx(1.0, abs=1e-9)

        oracle_auth, oracle_hub = weighted_hits_power_iteration(
            graph.nodes, graph.edges
        )
        for term in graph.nodes:
            assert scores.authority[term] == pytest.approx(
                oracle_auth[term], abs=1e-8
            )
            assert scores.hub[term] == pytest.approx(oracle_hub[term], abs=1e-8)

    def test_single_edge(self):
        scores = weighted_hits(graph_from_edges({("a", "b"): 0.7}))
        assert scores.authority["b"] == pytest.approx(1.0)
        assert scores.hub["a"] == pytest.approx(1.0)
        assert scores.authority["a"] == 0.0
        assert scores.hub["b"] == 0.0

    def test_edgeless_graph(self):
        graph = TermAssociationGraph(doc_id="d", nodes=["x", "y"])
        scores = weighted_hits(graph)
        assert scores.iterations == 0
        assert scores.converged
        assert set(scores.authority.values()) == {0.0}

    def test_matches_classic_hits_with_unit_weights(self):
        for seed in range(20):
            rng = random.Random(seed)
            n = rng.randint(2, 8)
            nodes = [f"n{i}" for i in range(n)]
            edges = {}
            for a in nodes:
                for b in nodes:
                    if a != b and rng.random() < 0.4:
                        edges[(a, b)] = 1.0
            if not edges:
                continue
            graph = TermAssociationGraph(doc_id="d", nodes=nodes, edges=edges)
            scores = weighted_hits(graph)
            oracle_auth, oracle_hub = classic_hits(nodes, edges.keys())
            for node in nodes:
                assert scores.authority[node] == pytest.approx(
                    oracle_auth[node], abs=1e-8
                )
                assert scores.hub[node] == pytest.approx(oracle_hub[node], abs=1e-8)

    def test_norms_after_convergence(self):
        graph = graph_from_edges(
            {("a", "b"): 0.9, ("b", "c"): 0.4, ("c", "a"): 0.6, ("a", "c"): 0.2}
        )
        scores = weighted_hits(graph)
        a = np.array(sorted(scores.authority.values()))
        h = np.array(sorted(scores.hub.values()))
        assert np.linalg.norm(a) == pytest.approx(1.0, abs=1e-9)
        assert np.linalg.norm(h) == pytest.approx(1.0, abs=1e-9)
        assert (a >= 0).all() and (h >= 0).all()

    def test_scale_invariance_of_ranking(self):
        base = {("a", "b"): 0.9, ("b", "c"): 0.4, ("c", "a"): 0.6,
                ("a", "d"): 0.3, ("d", "b"): 0.8}
        s1 = weighted_hits(graph_from_edges(base))
        scaled = {k: 7.5 * v for k, v in base.items()}
        s2 = weighted_hits(graph_from_edges(scaled))
        order = lambda d: sorted(d, key=lambda t: (-d[t], t))
        assert order(s1.authority) == order(s2.authority)
        assert order(s1.hub) == order(s2.hub)

    def test_no_inbound_means_zero_authority(self):
        scores = weighted_hits(graph_from_edges({("src", "mid"): 1.0,
                                                 ("mid", "sink"): 1.0}))
        assert scores.authority["src"] == 0.0
        assert scores.hub["sink"] == 0.0

    @pytest.mark.parametrize("edges", [
        {("X", "Y"): 1.0, ("X", "a"): 0.9, ("X", "b"): 0.8,
         ("a", "Y"): 0.9, ("b", "Y"): 0.8, ("a", "b"): 0.3},
        {("X", "Y"): 1.0, ("X", "a"): 0.5, ("a", "Y"): 0.5},
        {("X", "Y"): 0.9, ("X", "a"): 0.6, ("X", "b"): 0.4,
         ("a", "Y"): 0.7, ("b", "a"): 0.2, ("b", "Y"): 0.5},
    ])
    def test_pure_source_is_top_hub_pure_sink_is_top_authority(self, edges):
        """X has only out-edges (including one to Y), Y only in-edges:
        the mutual reinforcement makes X the top hub and Y the top
        authority."""
        scores = weighted_hits(graph_from_edges(edges))
        assert max(scores.hub, key=scores.hub.get) == "X"
        assert max(scores.authority, key=scores.authority.get) == "Y"


class TestTopKeywordsAndSources:
    def scores(self):
        return HitsScores(
            doc_id="d",
            authority={"x": 0.9, "y": 0.1, "alpha": 0.5, "beta": 0.5},
            hub={"x": 0.2, "y": 0.8, "alpha": 0.0, "beta": 0.1},
            iterations=3,
            converged=True,
        )

    def test_k_larger_than_nodes(self):
        auth, hubs = top_keywords_and_sources(self.scores(), k=10)
        assert len(auth) == len(hubs) == 4

    def test_top_one(self):
        auth, _ = top_keywords_and_sources(self.scores(), k=1)
        assert auth == [("x", 0.9)]

    def test_tie_breaks_lexicographically(self):
        scores = HitsScores("d", {"beta": 0.5, "alpha": 0.5}, {}, 1, True)
        auth, _ = top_keywords_and_sources(scores, k=1)
        assert auth == [("alpha", 0.5)]

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError):
            top_keywords_and_sources(self.scores(), k=0)


def scores_with(doc_id, authorities, hubs):
    return HitsScores(
        doc_id=doc_id,
        authority={t: 1.0 - 0.01 * i for i, t in enumerate(authorities)},
        hub={t: 1.0 - 0.01 * i for i, t in enumerate(hubs)},
        iterations=1,
        converged=True,
    )


class TestInduceDocumentLinks:
    def test_full_overlap(self):
        scores = {
            "A": scores_with("A", ["x", "y", "z"], ["p", "q", "r"]),
            "B": scores_with("B", ["p", "q", "r"], ["x", "y", "z"]),
        }
        links = induce_document_links(scores, k=3, theta=0.3)
        by_pair = {(l.from_doc, l.to_doc): l.overlap_score for l in links}
        assert by_pair[("A", "B")] == pytest.approx(1.0)
        assert by_pair[("B", "A")] == pytest.approx(1.0)

    def test_disjoint_no_link(self):
        scores = {
            "A": scores_with("A", ["x", "y", "z"], ["x", "y", "z"]),
            "B": scores_with("B", ["p", "q", "r"], ["p", "q", "r"]),
        }
        assert induce_document_links(scores, k=3, theta=0.3) == []

    def test_single_shared_term_meets_theta(self):
        scores = {
            "A": scores_with("A", ["x", "y", "z"], ["n1", "n2", "n3"]),
            "B": scores_with("B", ["m1", "m2", "m3"], ["x", "o2", "o3"]),
        }
        links = induce_document_links(scores, k=3, theta=0.3)
        assert [(l.from_doc, l.to_doc) for l in links] == [("A", "B")]
        assert links[0].overlap_score == pytest.approx(1 / 3)

    def test_no_self_links(self):
        scores = {"A": scores_with("A", ["x"], ["x"])}
        assert induce_document_links(scores, k=1, theta=0.0) == []


class TestTraceTopic:
    def test_no_outgoing(self):
        assert trace_topic("A", [], max_depth=5) == ["A"]

    def test_forced_walk(self):
        links = [DocLink("A", "B", 0.5), DocLink("B", "C", 0.4)]
        assert trace_topic("A", links, max_depth=5) == ["A", "B", "C"]

    def test_depth_cap(self):
        links = [DocLink("A", "B", 0.5), DocLink("B", "C", 0.4)]
        assert trace_topic("A", links, max_depth=1) == ["A", "B"]

    def test_cycle_guard(self):
        links = [DocLink("A", "B", 0.5), DocLink("B", "A", 0.9)]
        assert trace_topic("A", links, max_depth=10) == ["A", "B"]

    def test_strongest_link_then_lexicographic(self):
        links = [
            DocLink("A", "C", 0.5),
            DocLink("A", "B", 0.9),
            DocLink("A", "D", 0.9),
        ]
        assert trace_topic("A", links, max_depth=1) == ["A", "B"]

    def test_unknown_start(self):
        with pytest.raises(NotFound):
            trace_topic("ghost", [], max_depth=3, known_docs={"A"})

    def test_terminates_within_depth_plus_one(self):
        rng = random.Random(8)
        docs = [f"d{i}" for i in range(12)]
        links = [
            DocLink(a, b, round(rng.random(), 3))
            for a in docs
            for b in docs
            if a != b and rng.random() < 0.3
        ]
        for depth in (0, 1, 3, 7):
            chain = trace_topic("d0", links, max_depth=depth)
            assert len(chain) <= depth + 1
