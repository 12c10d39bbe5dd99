import json

import numpy as np
import pytest

from webmap.embedding import (
    FileProvider,
    Occurrence,
    StubProvider,
    averaged_term_embedding,
    context_hash,
    cosine,
    embed_occurrence,
)
from webmap.errors import (
    DegenerateVector,
    DimensionMismatch,
    EmptyInput,
    MissingEmbedding,
)


def occ(term, context="some sentence.", doc="d1", idx=0):
    return Occurrence(term=term, doc_id=doc, sentence_index=idx, context_window=context)


class TestStubProvider:
    def test_deterministic(self):
        provider = StubProvider(seed=7)
        v1 = embed_occurrence(provider, occ("earthquake"))
        v2 = embed_occurrence(provider, occ("earthquake"))
        np.testing.assert_array_equal(v1, v2)
        fresh = StubProvider(seed=7)
        np.testing.assert_array_equal(v1, embed_occurrence(fresh, occ("earthquake")))

    def test_unit_norm(self):
        provider = StubProvider(seed=0)
        for term in ("x", "seismic", "Apple"):
            v = embed_occurrence(provider, occ(term, context="any context here."))
            assert abs(np.linalg.norm(v) - 1.0) <= 1e-9

    def test_seed_changes_output(self):
        """Regression guard: the stub must not collapse to constant vectors."""
        corpus = [occ(t, context=f"sentence {i}.") for i, t in
                  enumerate(["alpha", "beta", "gamma"])]
        a = StubProvider(seed=1)
        b = StubProvider(seed=2)
        diffs = [
            not np.allclose(embed_occurrence(a, o), embed_occurrence(b, o))
            for o in corpus
        ]
        assert any(diffs)

    def test_context_sensitivity(self):
        provider = StubProvider(seed=0)
        v1 = embed_occurrence(provider, occ("bank", context="river bank erosion."))
        v2 = embed_occurrence(provider, occ("bank", context="bank held deposits."))
        assert not np.allclose(v1, v2)

    def test_empty_term_rejected(self):
        with pytest.raises(EmptyInput):
            embed_occurrence(StubProvider(), occ(""))

    def test_tiny_dimension_rejected(self):
        with pytest.raises(ValueError):
            StubProvider(dimension=1)


class TestFileProvider:
    def make_file(self, tmp_path, lines):
        path = tmp_path / "vectors.jsonl"
        path.write_text("\n".join(json.dumps(l) for l in lines) + "\n")
        return path

    def test_lookup_miss(self, tmp_path):
        path = self.make_file(tmp_path, [{"term": "dog", "vector": [1.0, 0.0]}])
        provider = FileProvider.load(path)
        with pytest.raises(MissingEmbedding) as err:
            embed_occurrence(provider, occ("cat"))
        assert err.value.term == "cat"
        assert "cat" in str(err.value)

    def test_term_lookup_normalized(self, tmp_path):
        path = self.make_file(tmp_path, [{"term": "dog", "vector": [3.0, 4.0]}])
        provider = FileProvider.load(path)
        v = embed_occurrence(provider, occ("dog"))
        np.testing.assert_allclose(v, [0.6, 0.8], atol=1e-12)

    def test_context_hash_precedence(self, tmp_path):
        sentence = "the dog barked loudly."
        path = self.make_file(
            tmp_path,
            [
                {"term": "dog", "vector": [1.0, 0.0]},
                {
                    "term": "dog",
                    "context_hash": context_hash(sentence),
                    "vector": [0.0, 1.0],
                },
            ],
        )
        provider = FileProvider.load(path)
        contextual = embed_occurrence(provider, occ("dog", context=sentence))
        generic = embed_occurrence(provider, occ("dog", context="another sentence."))
        np.testing.assert_allclose(contextual, [0.0, 1.0])
        np.testing.assert_allclose(generic, [1.0, 0.0])

    def test_dimension_mismatch_rejected(self, tmp_path):
        path = self.make_file(
            tmp_path,
            [
                {"term": "a", "vector": [1.0, 0.0]},
                {"term": "b", "vector": [1.0, 0.0, 0.0]},
            ],
        )
        with pytest.raises(DimensionMismatch):
            FileProvider.load(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "vectors.jsonl"
        path.write_text("")
        with pytest.raises(EmptyInput):
            FileProvider.load(path)


class TestCosine:
    def test_identity(self):
        v = np.array([0.3, -0.4, 0.2])
        assert cosine(v, v) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_forty_five_degrees(self):
        got = cosine(np.array([1.0, 0.0]), np.array([1.0, 1.0]))
        assert got == pytest.approx(0.7071, abs=1e-4)

    def test_symmetric_exactly(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            u = rng.standard_normal(8)
            v = rng.standard_normal(8)
            assert cosine(u, v) == cosine(v, u)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine(np.array([1.0, 0.0]), np.array([1.0, 0.0, 0.0]))

    def test_zero_vector(self):
        with pytest.raises(DegenerateVector):
            cosine(np.zeros(3), np.array([1.0, 0.0, 0.0]))

    def test_clamped_to_unit_interval(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            u = rng.standard_normal(4)
            v = rng.standard_normal(4)
            assert -1.0 <= cosine(u, v) <= 1.0


class TestAveragedTermEmbedding:
    def test_single_occurrence_is_identity(self):
        provider = StubProvider(seed=5)
        o = occ("fault", context="the fault ruptured.")
        np.testing.assert_allclose(
            averaged_term_embedding(provider, [o]),
            embed_occurrence(provider, o),
            atol=1e-12,
        )

    def test_mean_of_identical_occurrences(self):
        provider = StubProvider(seed=5)
        o = occ("fault", context="the fault ruptured.")
        np.testing.assert_allclose(
            averaged_term_embedding(provider, [o, o]),
            embed_occurrence(provider, o),
            atol=1e-12,
        )

    def test_empty_list(self):
        with pytest.raises(EmptyInput):
            averaged_term_embedding(StubProvider(), [])

    def test_antipodal_occurrences_degenerate(self, tmp_path):
        s1, s2 = "first sentence.", "second sentence."
        lines = [
            {"term": "x", "context_hash": context_hash(s1), "vector": [1.0, 0.0]},
            {"term": "x", "context_hash": context_hash(s2), "vector": [-1.0, 0.0]},
        ]
        path = tmp_path / "vectors.jsonl"
        path.write_text("\n".join(json.dumps(l) for l in lines) + "\n")
        provider = FileProvider.load(path)
        occs = [occ("x", context=s1), occ("x", context=s2, idx=1)]
        with pytest.raises(DegenerateVector):
            averaged_term_embedding(provider, occs)

    def test_result_unit_norm(self):
        provider = StubProvider(seed=9)
        occs = [occ("wave", context=f"sentence {i}.", idx=i) for i in range(4)]
        v = averaged_term_embedding(provider, occs)
        assert abs(np.linalg.norm(v) - 1.0) <= 1e-9
