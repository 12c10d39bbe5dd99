"""Ingestion pipeline and persisted-state loading.

Ingest runs in document order per peer: term selection, pair computation,
graph update, TRC derivation, cluster assignment; afterwards every cluster
file gets signpost scores, document links, and subcluster records. All
outputs land under data_dir deterministically (stable ordering, stable
serialization), so identical inputs with the same seed reproduce the
directory byte for byte.
"""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import quote

from .config import CorpusRecord, EngineConfig, load_corpus
from .errors import ConfigError, NoAnchor, WebMapError
from .overlay import (
    ClusterFile,
    WebMapOverlay,
    assert_overlay_invariants,
    assign_document,
    save_cluster_file,
)
from .proxgraph import (
    Document,
    TermProximityGraph,
    pairs_approach_a,
    pairs_approach_b,
    select_from_sentences,
    select_terms,
    update_graph,
)
from .signpost import (
    DocLink,
    HitsScores,
    build_term_association_graph,
    induce_document_links,
    top_keywords_and_sources,
    trace_topic,
    weighted_hits,
)
from .subcluster import (
    attach_subclusters,
    doc_feature_vector,
    median_bandwidth,
    subcluster_documents,
)


@dataclass
class IngestReport:
    docs_ingested: int = 0
    docs_failed: int = 0
    clusters_created: int = 0
    cluster_links: int = 0
    doc_links: int = 0
    outlier_docs: int = 0
    errors: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "docs_ingested": self.docs_ingested,
            "docs_failed": self.docs_failed,
            "clusters_created": self.clusters_created,
            "cluster_links": self.cluster_links,
            "doc_links": self.doc_links,
            "outlier_docs": self.outlier_docs,
            "errors": list(self.errors),
        }


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )


def _prepare_data_dir(data_dir: Path) -> None:
    if data_dir.exists():
        if not data_dir.is_dir():
            raise ConfigError(f"data_dir {data_dir} is not a directory")
        entries = list(data_dir.iterdir())
        if entries and not (data_dir / "config.json").exists():
            raise ConfigError(
                f"refusing to overwrite {data_dir}: not a previous ingest output"
            )
        shutil.rmtree(data_dir)
    data_dir.mkdir(parents=True)


def _signpost_dir(data_dir: Path, cluster: ClusterFile) -> Path:
    return (
        data_dir
        / "signpost"
        / cluster.peer_id
        / quote(cluster.trc, safe="")
    )


def ingest(config: EngineConfig) -> IngestReport:
    """Run the full pipeline and persist everything under data_dir."""
    data_dir = config.resolved_data_dir()
    _prepare_data_dir(data_dir)
    _write_json(data_dir / "config.json", config.to_dict())

    provider = config.provider()
    selector = config.selector()
    prox_cfg = config.prox_config()
    pair_fn = pairs_approach_a if config.approach == "A" else pairs_approach_b

    report = IngestReport()
    overlay = WebMapOverlay()
    seen_doc_ids: dict[str, str] = {}

    for spec in config.peers:
        peer = overlay.add_peer(spec.peer_id)
        loaded = load_corpus(spec, config)
        report.errors.extend(loaded.errors)
        report.docs_failed += len(loaded.errors)
        for record in loaded.records:
            try:
                doc = _ingest_record(
                    overlay, peer.peer_id, record, provider, selector,
                    prox_cfg, pair_fn, seen_doc_ids,
                )
            except WebMapError as err:
                report.errors.append(f"{spec.peer_id}/{record.id}: {err}")
                report.docs_failed += 1
                continue
            report.docs_ingested += 1
        assert_overlay_invariants(overlay)

    clusters = overlay.all_clusters()
    report.clusters_created = len(clusters)
    report.cluster_links = (
        sum(len(c.links) for c in clusters) // 2
    )  # links are stored on both endpoints

    reclustering: dict[str, list[str]] = {}
    for cluster in clusters:
        doc_links = _signpost_cluster(
            overlay, cluster, provider, config, data_dir
        )
        report.doc_links += len(doc_links)
        queue = _subcluster_cluster(overlay, cluster, provider, config)
        if queue:
            reclustering[f"{cluster.peer_id}/{cluster.trc}"] = sorted(queue)
            report.outlier_docs += len(queue)

    if report.docs_ingested:
        for peer_id in sorted(overlay.peers):
            peer = overlay.peers[peer_id]
            if not peer.documents and not peer.cluster_files:
                continue
            peer.graph.save(_ensure_parent(data_dir / "graphs" / f"{peer_id}.json"))
            _save_documents(data_dir / "docs" / f"{peer_id}.jsonl", peer.documents)
            for trc in sorted(peer.cluster_files):
                save_cluster_file(data_dir, peer.cluster_files[trc])
        if reclustering:
            _write_json(data_dir / "reclustering.json", reclustering)
    return report


def _ensure_parent(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _ingest_record(
    overlay: WebMapOverlay,
    peer_id: str,
    record: CorpusRecord,
    provider,
    selector,
    prox_cfg,
    pair_fn,
    seen_doc_ids: dict[str, str],
) -> Document:
    if record.id in seen_doc_ids:
        raise WebMapError(
            f"doc id {record.id!r} already ingested by peer "
            f"{seen_doc_ids[record.id]!r}; ids must be unique across the corpus"
        )
    doc = select_terms(
        record.text, selector, doc_id=record.id, url=record.url, title=record.title
    )
    peer = overlay.peers[peer_id]
    update_graph(peer.graph, pair_fn(provider, doc), prox_cfg)
    assign_document(overlay, peer_id, doc)  # raises NoAnchor for termless docs
    seen_doc_ids[record.id] = peer_id
    return doc


def _cluster_documents(overlay: WebMapOverlay, cluster: ClusterFile) -> list[Document]:
    return [
        overlay.peers[entry.owner_peer].documents[entry.doc_id]
        for entry in sorted(cluster.docs)
    ]


def _signpost_cluster(
    overlay: WebMapOverlay,
    cluster: ClusterFile,
    provider,
    config: EngineConfig,
    data_dir: Path,
) -> list[DocLink]:
    docs = _cluster_documents(overlay, cluster)
    if not docs:
        return []
    out_dir = _signpost_dir(data_dir, cluster)
    scores: dict[str, HitsScores] = {}
    for doc in docs:
        graph = build_term_association_graph(
            doc, provider, min_assn=config.signpost.d_min
        )
        scores[doc.id] = weighted_hits(
            graph, tol=config.signpost.tol, max_iter=config.signpost.max_iter
        )
    doc_links = induce_document_links(
        scores, k=config.signpost.k, theta=config.signpost.theta
    )
    for doc_id in sorted(scores):
        auth, hubs = top_keywords_and_sources(scores[doc_id], config.signpost.k)
        _write_json(
            out_dir / f"{quote(doc_id, safe='')}.json",
            {
                "doc_id": doc_id,
                "authorities": [{"term": t, "score": s} for t, s in auth],
                "hubs": [{"term": t, "score": s} for t, s in hubs],
            },
        )
    _write_json(
        out_dir / "doclinks.json",
        [
            {"from": l.from_doc, "to": l.to_doc, "overlap": l.overlap_score}
            for l in sorted(doc_links, key=lambda l: (l.from_doc, l.to_doc))
        ],
    )
    return doc_links


def _subcluster_cluster(
    overlay: WebMapOverlay, cluster: ClusterFile, provider, config: EngineConfig
) -> set[str]:
    docs = _cluster_documents(overlay, cluster)
    if not docs:
        attach_subclusters(cluster, [])
        return set()
    settings = config.subcluster
    if settings.h is not None:
        bandwidth = settings.h
    else:
        points = [doc_feature_vector(provider, d) for d in docs]
        bandwidth = median_bandwidth(points)
    run = subcluster_documents(provider, docs, settings.mean_shift_config(bandwidth))
    attach_subclusters(cluster, run.records)
    return run.reclustering_queue


def _save_documents(path: Path, documents: dict[str, Document]) -> None:
    _ensure_parent(path)
    lines = []
    for doc_id in sorted(documents):
        doc = documents[doc_id]
        lines.append(
            json.dumps(
                {
                    "id": doc.id,
                    "url": doc.url,
                    "title": doc.title,
                    "sentences": doc.sentences,
                },
                ensure_ascii=False,
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- persisted state -------------------------------------------------------


@dataclass
class EngineState:
    """Everything the read-only service needs, rebuilt from data_dir."""

    config: EngineConfig
    overlay: WebMapOverlay
    provider: object
    signposts: dict[str, dict] = field(default_factory=dict)
    doc_links: dict[str, list[DocLink]] = field(default_factory=dict)
    doc_cluster: dict[str, str] = field(default_factory=dict)

    def all_doc_links(self) -> list[DocLink]:
        out = []
        for key in sorted(self.doc_links):
            out.extend(self.doc_links[key])
        return out

    def trace(self, doc_id: str, depth: int) -> list[str]:
        return trace_topic(
            doc_id,
            self.all_doc_links(),
            max_depth=depth,
            known_docs=set(self.doc_cluster),
        )


def load_state(data_dir: str | Path) -> EngineState:
    """Rebuild overlay, signposts, and doc links from a data_dir."""
    data_dir = Path(data_dir)
    snapshot = data_dir / "config.json"
    if not snapshot.is_file():
        raise ConfigError(f"{data_dir} has no config snapshot; run ingest first")
    config = EngineConfig.load(snapshot)
    provider = config.provider()
    selector = config.selector()
    overlay = WebMapOverlay()

    peer_ids = set()
    for sub in ("graphs", "docs", "clusters"):
        base = data_dir / sub
        if base.is_dir():
            for child in base.iterdir():
                peer_ids.add(child.name.removesuffix(".json").removesuffix(".jsonl"))

    for peer_id in sorted(peer_ids):
        peer = overlay.add_peer(peer_id)
        graph_path = data_dir / "graphs" / f"{peer_id}.json"
        if graph_path.is_file():
            peer.graph = TermProximityGraph.load(graph_path)
        docs_path = data_dir / "docs" / f"{peer_id}.jsonl"
        if docs_path.is_file():
            for line in docs_path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                entry = json.loads(line)
                doc = select_from_sentences(
                    entry["sentences"],
                    selector,
                    doc_id=entry["id"],
                    url=entry["url"],
                    title=entry["title"],
                )
                peer.documents[doc.id] = doc
        cluster_dir = data_dir / "clusters" / peer_id
        if cluster_dir.is_dir():
            from .overlay import load_cluster_file

            for path in sorted(cluster_dir.glob("*.json")):
                cluster = load_cluster_file(path, peer_id=peer_id)
                peer.cluster_files[cluster.trc] = cluster
                overlay.registry.register(cluster.trc, peer_id)

    state = EngineState(config=config, overlay=overlay, provider=provider)
    for cluster in overlay.all_clusters():
        key = f"{cluster.peer_id}/{cluster.trc}"
        for entry in cluster.docs:
            state.doc_cluster[entry.doc_id] = key
        sp_dir = _signpost_dir(data_dir, cluster)
        links_path = sp_dir / "doclinks.json"
        if links_path.is_file():
            state.doc_links[key] = [
                DocLink(e["from"], e["to"], e["overlap"])
                for e in json.loads(links_path.read_text(encoding="utf-8"))
            ]
        for entry in sorted(cluster.docs):
            doc_path = sp_dir / f"{quote(entry.doc_id, safe='')}.json"
            if doc_path.is_file():
                state.signposts[entry.doc_id] = json.loads(
                    doc_path.read_text(encoding="utf-8")
                )
    return state
