"""Density-based subclusters inside a cluster file.

Document feature vectors are iteratively shifted toward local maxima of a
B-spline kernel density estimate; vectors arriving at the same location
merge into one subcluster, so the cluster count falls out of the data.
Sparse or thin groups are flagged as outliers and queued for
re-clustering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .embedding import EmbeddingProvider, Vector, averaged_term_embedding, unit
from .errors import DomainError, EmptyInput, NoFeatures, PartitionError
from .proxgraph import Document

if TYPE_CHECKING:
    from .overlay import ClusterFile


@dataclass
class FeatureVector:
    doc_id: str
    vector: Vector


@dataclass
class MeanShiftConfig:
    """Bandwidth plus convergence and outlier thresholds."""

    h: float
    epsilon: float = 1e-5
    max_iter: int = 500
    merge_radius: float | None = None  # None = h / 2
    min_pts: int = 2
    tau: float = 0.05

    def __post_init__(self) -> None:
        if self.h <= 0:
            raise ValueError(f"bandwidth h must be > 0, got {self.h}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.merge_radius is not None and self.merge_radius <= 0:
            raise ValueError("merge_radius must be > 0 when given")
        if self.min_pts < 1:
            raise ValueError(f"min_pts must be >= 1, got {self.min_pts}")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must lie in [0, 1], got {self.tau}")

    @property
    def effective_merge_radius(self) -> float:
        return self.h / 2.0 if self.merge_radius is None else self.merge_radius


@dataclass
class SubclusterRecord:
    """One disjoint group of a cluster file's documents."""

    subcluster_id: str
    doc_ids: set[str]
    mode: Vector | None
    mode_density: float
    outlier: bool = False

    def to_dict(self) -> dict:
        # mode vector deliberately omitted on disk; it is recomputable
        return {
            "id": self.subcluster_id,
            "docs": sorted(self.doc_ids),
            "mode_density": self.mode_density,
            "outlier": self.outlier,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SubclusterRecord":
        return cls(
            subcluster_id=data["id"],
            doc_ids=set(data["docs"]),
            mode=None,
            mode_density=data["mode_density"],
            outlier=data["outlier"],
        )


def doc_feature_vector(provider: EmbeddingProvider, doc: Document) -> FeatureVector:
    """Re-normalized mean of the document's averaged term embeddings."""
    by_term: dict[str, list] = {}
    for occ in doc.selected_terms:
        by_term.setdefault(occ.term, []).append(occ)
    if not by_term:
        raise NoFeatures(f"document {doc.id!r} has no selected terms")
    term_vectors = [
        averaged_term_embedding(provider, by_term[t]) for t in sorted(by_term)
    ]
    return FeatureVector(doc_id=doc.id, vector=unit(np.mean(term_vectors, axis=0)))


def bspline_kernel(u: float) -> float:
    """Cubic B-spline bell, compactly supported on [0, 2)."""
    if u < 0:
        raise DomainError(f"kernel argument must be >= 0, got {u}")
    if u < 1.0:
        return (3.0 * u**3 - 6.0 * u**2 + 4.0) / 6.0
    if u < 2.0:
        return (2.0 - u) ** 3 / 6.0
    return 0.0


def _bspline_array(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    near = u < 1.0
    mid = (u >= 1.0) & (u < 2.0)
    un = u[near]
    out[near] = (3.0 * un**3 - 6.0 * un**2 + 4.0) / 6.0
    out[mid] = (2.0 - u[mid]) ** 3 / 6.0
    return out


def kde(points: list[FeatureVector], x: Vector, h: float) -> float:
    """Mean B-spline kernel mass at x over the point set."""
    if not points:
        raise EmptyInput("kde requires at least one point")
    matrix = np.stack([p.vector for p in points])
    dists = np.linalg.norm(matrix - np.asarray(x), axis=1)
    return float(_bspline_array(dists / h).mean())


@dataclass
class PointMode:
    mode: Vector
    iterations: int


def mean_shift(
    points: list[FeatureVector], cfg: MeanShiftConfig
) -> dict[str, PointMode]:
    """Shift a shadow copy of every feature vector uphill until it settles.

    Each shadow y is repeatedly replaced by the kernel-weighted mean of the
    original points; originals are never mutated. A shadow with zero total
    kernel mass is its own mode immediately (isolated point).
    """
    if not points:
        raise EmptyInput("mean_shift requires at least one point")
    order = sorted(range(len(points)), key=lambda i: points[i].doc_id)
    doc_ids = [points[i].doc_id for i in order]
    X = np.stack([points[i].vector for i in order]).astype(np.float64)
    Y = X.copy()
    n = len(doc_ids)
    iterations = np.zeros(n, dtype=int)
    active = np.ones(n, dtype=bool)

    for sweep in range(1, cfg.max_iter + 1):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        dists = np.linalg.norm(Y[idx][:, None, :] - X[None, :, :], axis=2)
        weights = _bspline_array(dists / cfg.h)
        mass = weights.sum(axis=1)
        isolated = mass == 0.0
        if isolated.any():
            frozen = idx[isolated]
            iterations[frozen] = sweep
            active[frozen] = False
            idx = idx[~isolated]
            weights = weights[~isolated]
            mass = mass[~isolated]
        if idx.size == 0:
            continue
        shifted = (weights @ X) / mass[:, None]
        steps = np.linalg.norm(shifted - Y[idx], axis=1)
        Y[idx] = shifted
        done = idx[steps < cfg.epsilon]
        iterations[done] = sweep
        active[done] = False

    iterations[active] = cfg.max_iter
    return {
        doc_ids[i]: PointMode(mode=Y[i].copy(), iterations=int(iterations[i]))
        for i in range(n)
    }


def merge_modes(
    points: list[FeatureVector],
    mode_map: dict[str, PointMode],
    cfg: MeanShiftConfig,
) -> list[SubclusterRecord]:
    """Single-linkage grouping of converged modes within the merge radius.

    Each group becomes one record whose mode is the member-mode centroid
    and whose density is the KDE there; together the records partition the
    document set.
    """
    if not mode_map:
        raise EmptyInput("merge_modes requires at least one mode")
    doc_ids = sorted(mode_map)
    modes = np.stack([mode_map[d].mode for d in doc_ids])
    n = len(doc_ids)
    radius = cfg.effective_merge_radius

    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(modes[i] - modes[j]) <= radius:
                parent[find(j)] = find(i)

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)

    records = []
    for number, root in enumerate(sorted(groups, key=lambda r: doc_ids[min(groups[r])])):
        members = groups[root]
        centroid = modes[members].mean(axis=0)
        records.append(
            SubclusterRecord(
                subcluster_id=f"sc-{number}",
                doc_ids={doc_ids[i] for i in members},
                mode=centroid,
                mode_density=kde(points, centroid, cfg.h),
            )
        )
    return records


def detect_outliers(
    records: list[SubclusterRecord], cfg: MeanShiftConfig
) -> tuple[list[SubclusterRecord], set[str]]:
    """Flag sparse subclusters: too few members or a mode density below
    tau times the densest record. Flagged documents join the
    re-clustering queue."""
    if not records:
        return records, set()
    max_density = max(r.mode_density for r in records)
    queue: set[str] = set()
    for record in records:
        record.outlier = (
            len(record.doc_ids) < cfg.min_pts
            or record.mode_density < cfg.tau * max_density
        )
        if record.outlier:
            queue |= record.doc_ids
    return records, queue


def attach_subclusters(
    cluster_file: "ClusterFile", records: list[SubclusterRecord]
) -> "ClusterFile":
    """Replace the cluster file's subcluster management structure.

    The records must partition the cluster's current document set exactly.
    """
    expected = cluster_file.doc_ids()
    covered: set[str] = set()
    for record in records:
        overlap = covered & record.doc_ids
        if overlap:
            raise PartitionError(f"documents in multiple records: {sorted(overlap)}")
        covered |= record.doc_ids
    if covered != expected:
        missing = sorted(expected - covered)
        foreign = sorted(covered - expected)
        raise PartitionError(
            f"records do not partition the cluster: missing={missing} "
            f"foreign={foreign}"
        )
    cluster_file.subclusters = list(records)
    return cluster_file


def median_bandwidth(points: list[FeatureVector]) -> float:
    """Median pairwise distance; 1.0 when degenerate (no spread)."""
    if len(points) < 2:
        return 1.0
    matrix = np.stack([p.vector for p in points])
    diffs = matrix[:, None, :] - matrix[None, :, :]
    dists = np.linalg.norm(diffs, axis=2)
    upper = dists[np.triu_indices(len(points), k=1)]
    median = float(np.median(upper))
    return median if median > 1e-12 else 1.0


@dataclass
class SubclusterRun:
    records: list[SubclusterRecord]
    reclustering_queue: set[str]
    bandwidth: float


def subcluster_documents(
    provider: EmbeddingProvider,
    docs: list[Document],
    cfg: MeanShiftConfig | None = None,
) -> SubclusterRun:
    """Full batch for one cluster file: feature vectors, mode seeking,
    merging, outlier detection. Bandwidth defaults to the median pairwise
    distance of the feature vectors."""
    points = [doc_feature_vector(provider, d) for d in sorted(docs, key=lambda d: d.id)]
    if cfg is None:
        cfg = MeanShiftConfig(h=median_bandwidth(points))
    modes = mean_shift(points, cfg)
    records = merge_modes(points, modes, cfg)
    records, queue = detect_outliers(records, cfg)
    return SubclusterRun(records=records, reclustering_queue=queue, bandwidth=cfg.h)
