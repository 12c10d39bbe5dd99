"""Term vectors and similarity math.

Two providers are available: a deterministic offline stub (seeded hash
vectors with context mixing, so terms sharing a sentence land measurably
closer than unrelated terms) and a JSONL-backed table that bridges to
vectors precomputed by any real language model.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateVector,
    DimensionMismatch,
    EmptyInput,
    MissingEmbedding,
)

Vector = np.ndarray

DEFAULT_DIMENSION = 128
DEFAULT_CONTEXT_WEIGHT = 2.0


@dataclass(frozen=True)
class Occurrence:
    """One appearance of a selected term, with its sentence as context."""

    term: str
    doc_id: str
    sentence_index: int
    context_window: str


def unit(v: Vector) -> Vector:
    """Scale v to unit L2 norm; a zero vector has no direction."""
    norm = float(np.linalg.norm(v))
    if norm < 1e-12:
        raise DegenerateVector("cannot normalize a zero vector")
    return v / norm


def context_hash(text: str) -> str:
    """Lowercase hex of the 64-bit blake2b hash of a sentence.

    This is the hash referenced by the vector-file format: an entry
    carrying a matching "context_hash" takes precedence over the
    term-only entry.
    """
    return hashlib.blake2b(text.encode("utf-8"), digest_size=8).hexdigest()


def _hashed_unit_vector(text: str, seed: int, dimension: int) -> Vector:
    digest = hashlib.blake2b(
        f"{seed}:{text}".encode("utf-8"), digest_size=8
    ).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "big"))
    v = rng.standard_normal(dimension)
    norm = float(np.linalg.norm(v))
    if norm < 1e-12:  # unreachable for D >= 2, kept as a hard guard
        v[0] = 1.0
        norm = 1.0
    return v / norm


class StubProvider:
    """Deterministic embedding stub: pure function of (term, context, seed)."""

    kind = "stub"

    def __init__(
        self,
        seed: int = 0,
        dimension: int = DEFAULT_DIMENSION,
        context_weight: float = DEFAULT_CONTEXT_WEIGHT,
    ):
        if dimension < 2:
            raise ValueError(f"dimension must be >= 2, got {dimension}")
        self.seed = seed
        self.dimension = dimension
        self.context_weight = context_weight
        self._cache: dict[tuple[str, str], Vector] = {}

    def vector_for(self, term: str, context: str) -> Vector:
        key = (term, context)
        cached = self._cache.get(key)
        if cached is None:
            v = _hashed_unit_vector(f"term:{term}", self.seed, self.dimension)
            c = _hashed_unit_vector(f"ctx:{context}", self.seed, self.dimension)
            cached = unit(v + self.context_weight * c)
            self._cache[key] = cached
        return cached


class FileProvider:
    """Vectors loaded from a JSONL table produced by any external model.

    Line format: {"term": str, "vector": [...]} with optional
    {"term": str, "context_hash": str, "vector": [...]} entries that win
    when the occurrence's sentence hashes to the same value.
    """

    kind = "file"

    def __init__(
        self,
        table: dict[str, Vector],
        contextual: dict[tuple[str, str], Vector],
        dimension: int,
    ):
        self.table = table
        self.contextual = contextual
        self.dimension = dimension

    @classmethod
    def load(cls, path: str | Path) -> "FileProvider":
        table: dict[str, Vector] = {}
        contextual: dict[tuple[str, str], Vector] = {}
        dimension: int | None = None
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                entry = json.loads(line)
                vec = np.asarray(entry["vector"], dtype=np.float64)
                if dimension is None:
                    if vec.size < 2:
                        raise DimensionMismatch(
                            f"{path}:{lineno}: vectors must have dimension >= 2"
                        )
                    dimension = int(vec.size)
                elif vec.size != dimension:
                    raise DimensionMismatch(
                        f"{path}:{lineno}: expected dimension {dimension}, "
                        f"got {vec.size}"
                    )
                if not np.all(np.isfinite(vec)):
                    raise DegenerateVector(
                        f"{path}:{lineno}: non-finite component"
                    )
                vec = unit(vec)
                term = entry["term"]
                if "context_hash" in entry:
                    contextual[(term, entry["context_hash"])] = vec
                else:
                    table[term] = vec
        if dimension is None:
            raise EmptyInput(f"{path}: vector file contains no entries")
        return cls(table, contextual, dimension)

    def vector_for(self, term: str, context: str) -> Vector:
        hit = self.contextual.get((term, context_hash(context)))
        if hit is not None:
            return hit
        hit = self.table.get(term)
        if hit is None:
            raise MissingEmbedding(term)
        return hit


EmbeddingProvider = StubProvider | FileProvider


def embed_occurrence(provider: EmbeddingProvider, occ: Occurrence) -> Vector:
    """Unit-norm vector for one term occurrence."""
    if not occ.term:
        raise EmptyInput("occurrence has an empty term")
    return provider.vector_for(occ.term, occ.context_window)


def cosine(u: Vector, v: Vector) -> float:
    """Cosine similarity, clamped into [-1, 1] against float drift."""
    if u.shape != v.shape:
        raise DimensionMismatch(f"dimensions {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu < 1e-12 or nv < 1e-12:
        raise DegenerateVector("cosine of a zero vector is undefined")
    return float(np.clip(float(np.dot(u, v)) / (nu * nv), -1.0, 1.0))


def averaged_term_embedding(
    provider: EmbeddingProvider, occs: list[Occurrence]
) -> Vector:
    """Mean of one term's occurrence embeddings, re-normalized to unit norm."""
    if not occs:
        raise EmptyInput("no occurrences to average")
    vectors = [embed_occurrence(provider, occ) for occ in occs]
    return unit(np.mean(vectors, axis=0))
