"""Cluster-file overlay across simulated peers.

Peers contribute documents and local proximity graphs; cluster files are
identified by text-representing centroid terms (TRCs) and carry document
links plus bidirectional links to related clusters. All peer interaction
funnels through the WebMapOverlay request methods (lookup_cluster,
create_cluster, fetch_cluster, attach_doc), which is the seam where a
distributed transport could replace in-process calls.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import quote

from .embedding import EmbeddingProvider, cosine
from .errors import NoAnchor, NoMatch, NotFound, NotReachable, SelfLink, WebMapError
from .proxgraph import (
    Document,
    TermProximityGraph,
    TermSelector,
    distance_map,
    select_terms,
    shortest_path,
)

UNREACHABLE_TERM_PENALTY = 1.0


@dataclass(frozen=True, order=True)
class ClusterRef:
    """Globally unique cluster identity: TRC plus hosting peer."""

    trc: str
    peer_id: str


@dataclass(frozen=True, order=True)
class DocLinkEntry:
    """A document link stored inside a cluster file."""

    doc_id: str
    url: str
    title: str
    owner_peer: str


@dataclass
class ClusterFile:
    """An overlay node: document links, cluster links, subcluster records."""

    trc: str
    peer_id: str
    docs: list[DocLinkEntry] = field(default_factory=list)
    links: set[ClusterRef] = field(default_factory=set)
    subclusters: list = field(default_factory=list)

    @property
    def ref(self) -> ClusterRef:
        return ClusterRef(self.trc, self.peer_id)

    def doc_ids(self) -> set[str]:
        return {d.doc_id for d in self.docs}

    def to_dict(self) -> dict:
        return {
            "trc": self.trc,
            "docs": [
                {
                    "doc_id": d.doc_id,
                    "url": d.url,
                    "title": d.title,
                    "owner_peer": d.owner_peer,
                }
                for d in sorted(self.docs)
            ],
            "links": [
                {"trc": ref.trc, "peer_id": ref.peer_id}
                for ref in sorted(self.links)
            ],
            "subclusters": [rec.to_dict() for rec in self.subclusters],
        }

    @classmethod
    def from_dict(cls, data: dict, peer_id: str) -> "ClusterFile":
        from .subcluster import SubclusterRecord

        return cls(
            trc=data["trc"],
            peer_id=peer_id,
            docs=[
                DocLinkEntry(
                    doc_id=d["doc_id"],
                    url=d["url"],
                    title=d["title"],
                    owner_peer=d["owner_peer"],
                )
                for d in data.get("docs", [])
            ],
            links={
                ClusterRef(l["trc"], l["peer_id"]) for l in data.get("links", [])
            },
            subclusters=[
                SubclusterRecord.from_dict(s) for s in data.get("subclusters", [])
            ],
        )


@dataclass
class Peer:
    """One simulated web server: documents, graph, hosted cluster files."""

    peer_id: str
    graph: TermProximityGraph = field(default_factory=TermProximityGraph)
    documents: dict[str, Document] = field(default_factory=dict)
    cluster_files: dict[str, ClusterFile] = field(default_factory=dict)


class Registry:
    """Global TRC -> hosting peers directory (the simulation's DHT seam)."""

    def __init__(self) -> None:
        self.entries: dict[str, set[str]] = {}

    def register(self, trc: str, peer_id: str) -> None:
        self.entries.setdefault(trc, set()).add(peer_id)

    def unregister(self, trc: str, peer_id: str) -> None:
        peers = self.entries.get(trc)
        if peers:
            peers.discard(peer_id)
            if not peers:
                del self.entries[trc]

    def lookup(self, trc: str) -> set[str]:
        return set(self.entries.get(trc, ()))

    def trcs(self) -> list[str]:
        return sorted(self.entries)

    def __contains__(self, trc: str) -> bool:
        return trc in self.entries


def lookup_cluster(registry: Registry, trc: str) -> set[str]:
    """Peers hosting a cluster file for this TRC; empty means nonexistent."""
    return registry.lookup(trc)


@dataclass
class PathResult:
    created: list[str] = field(default_factory=list)
    links: list[tuple[str, str]] = field(default_factory=list)
    isolated: bool = False


@dataclass
class Assignment:
    """Outcome of running the link-induction procedure for one document."""

    doc_id: str
    trc: str
    attached_to: ClusterRef
    created_clusters: list[str] = field(default_factory=list)
    path_links_created: list[tuple[str, str]] = field(default_factory=list)
    isolated: bool = False
    degraded: bool = False


class WebMapOverlay:
    """All peers plus the registry; mutations are serialized by the caller."""

    def __init__(self) -> None:
        self.peers: dict[str, Peer] = {}
        self.registry = Registry()

    def add_peer(self, peer_id: str) -> Peer:
        if peer_id in self.peers:
            raise WebMapError(f"duplicate peer id {peer_id!r}")
        peer = Peer(peer_id=peer_id)
        self.peers[peer_id] = peer
        return peer

    # -- peer interaction requests (transport seam) --------------------

    def lookup_cluster(self, trc: str) -> set[str]:
        return self.registry.lookup(trc)

    def host_for(self, trc: str) -> str:
        """Deterministic host choice: lexicographically smallest peer."""
        hosts = self.registry.lookup(trc)
        if not hosts:
            raise NotFound(f"no cluster file registered for {trc!r}")
        return min(hosts)

    def fetch_cluster(self, peer_id: str, trc: str) -> ClusterFile:
        peer = self.peers.get(peer_id)
        if peer is None or trc not in peer.cluster_files:
            raise NotFound(f"no cluster file {trc!r} on peer {peer_id!r}")
        return peer.cluster_files[trc]

    def create_cluster(self, peer_id: str, trc: str) -> ClusterFile:
        peer = self.peers[peer_id]
        if trc in peer.cluster_files:
            raise WebMapError(f"cluster {trc!r} already exists on {peer_id!r}")
        cluster = ClusterFile(trc=trc, peer_id=peer_id)
        peer.cluster_files[trc] = cluster
        self.registry.register(trc, peer_id)
        return cluster

    def attach_doc(self, peer_id: str, trc: str, entry: DocLinkEntry) -> None:
        cluster = self.fetch_cluster(peer_id, trc)
        if entry not in cluster.docs:
            cluster.docs.append(entry)

    def all_clusters(self) -> list[ClusterFile]:
        out = []
        for peer_id in sorted(self.peers):
            peer = self.peers[peer_id]
            out.extend(peer.cluster_files[t] for t in sorted(peer.cluster_files))
        return out


def derive_trc(graph: TermProximityGraph, doc: Document) -> str:
    """The graph node minimizing summed path distance to the document's
    in-graph terms; unreachable terms cost a flat penalty of 1.0 each.

    Ties break toward higher degree, then lexicographic order.
    """
    doc_terms = sorted({occ.term for occ in doc.selected_terms} & graph.nodes)
    if not doc_terms:
        raise NoAnchor(f"no term of document {doc.id!r} is in the graph")
    totals = {node: 0.0 for node in graph.nodes}
    for term in doc_terms:
        dmap = distance_map(graph, term)
        for node in totals:
            totals[node] += dmap.get(node, UNREACHABLE_TERM_PENALTY)
    return min(
        sorted(totals), key=lambda n: (totals[n], -graph.degree(n), n)
    )


def most_frequent_term(doc: Document) -> str:
    """Fallback TRC for documents with no graph anchor."""
    counts: dict[str, int] = {}
    for occ in doc.selected_terms:
        counts[occ.term] = counts.get(occ.term, 0) + 1
    if not counts:
        raise NoAnchor(f"document {doc.id!r} has no selected terms")
    return min(sorted(counts), key=lambda t: (-counts[t], t))


def link_clusters(a: ClusterFile, b: ClusterFile) -> None:
    """Record the bidirectional link on both cluster files; idempotent."""
    if a.ref == b.ref:
        raise SelfLink(f"cluster {a.ref} cannot link to itself")
    a.links.add(b.ref)
    b.links.add(a.ref)


def create_cluster_path(
    overlay: WebMapOverlay, peer_id: str, new_trc: str
) -> PathResult:
    """Wire a freshly created cluster into the overlay.

    Takes the shortest proximity-graph path from the set of already
    registered TRCs present in this peer's graph, creating cluster files
    for bare intermediate nodes and bidirectional links along the way.
    An unreachable or sourceless cluster stays isolated; that is an
    outcome, not an error.
    """
    peer = overlay.peers[peer_id]
    result = PathResult()
    if new_trc not in peer.graph.nodes:
        result.isolated = True
        return result
    sources = {
        trc
        for trc in overlay.registry.trcs()
        if trc != new_trc and trc in peer.graph.nodes
    }
    if not sources:
        result.isolated = True
        return result
    try:
        path = shortest_path(peer.graph, sources, new_trc)
    except NotReachable:
        result.isolated = True
        return result
    for node in path:
        if not overlay.registry.lookup(node):
            overlay.create_cluster(peer_id, node)
            result.created.append(node)
    for a, b in zip(path, path[1:]):
        cluster_a = overlay.fetch_cluster(overlay.host_for(a), a)
        cluster_b = overlay.fetch_cluster(overlay.host_for(b), b)
        link_clusters(cluster_a, cluster_b)
        result.links.append((a, b))
    return result


def assign_document(
    overlay: WebMapOverlay, peer_id: str, doc: Document
) -> Assignment:
    """Attach a document to its cluster file, creating and wiring the
    cluster (plus any path intermediates) when it does not exist yet."""
    peer = overlay.peers[peer_id]
    if doc.id in peer.documents:
        raise WebMapError(f"duplicate document id {doc.id!r} on peer {peer_id!r}")

    degraded = False
    try:
        trc = derive_trc(peer.graph, doc)
    except NoAnchor:
        trc = most_frequent_term(doc)  # raises NoAnchor for termless docs
        degraded = True

    peer.documents[doc.id] = doc
    entry = DocLinkEntry(
        doc_id=doc.id, url=doc.url, title=doc.title, owner_peer=peer_id
    )
    hosts = overlay.lookup_cluster(trc)
    if hosts:
        host = min(hosts)
        overlay.attach_doc(host, trc, entry)
        return Assignment(
            doc_id=doc.id,
            trc=trc,
            attached_to=ClusterRef(trc, host),
            degraded=degraded,
        )
    cluster = overlay.create_cluster(peer_id, trc)
    overlay.attach_doc(peer_id, trc, entry)
    path = create_cluster_path(overlay, peer_id, trc)
    return Assignment(
        doc_id=doc.id,
        trc=trc,
        attached_to=cluster.ref,
        created_clusters=[trc] + path.created,
        path_links_created=path.links,
        isolated=path.isolated,
        degraded=degraded,
    )


@dataclass
class QueryResult:
    trc: str
    peer_id: str
    documents: list[tuple[DocLinkEntry, float]]
    related_clusters: list[ClusterRef]


def resolve_query(
    overlay: WebMapOverlay,
    query_text: str,
    provider: EmbeddingProvider,
    selector: TermSelector | None = None,
    peer_id: str | None = None,
) -> QueryResult:
    """Assign the query a TRC and return that cluster's ranked documents.

    Ranking is cosine similarity between the query's mean term embedding
    and each document's feature vector.
    """
    from .subcluster import doc_feature_vector

    query_doc = select_terms(query_text, selector, doc_id="<query>")
    terms = query_doc.distinct_terms()
    if not terms:
        raise NoMatch("query contains no selectable terms")

    if peer_id is None:
        if not overlay.peers:
            raise NoMatch("no peers in the overlay")
        peer_id = min(overlay.peers)
    graph = overlay.peers[peer_id].graph

    if len(terms) == 1 and terms[0] in overlay.registry:
        trc = terms[0]
    else:
        try:
            trc = derive_trc(graph, query_doc)
        except NoAnchor:
            raise NoMatch("no query term appears in the proximity graph")
        if trc not in overlay.registry:
            raise NoMatch(
                f"derived term {trc!r} has no cluster file",
                suggestion=_nearest_registered_trc(graph, overlay, terms),
            )

    host = overlay.host_for(trc)
    cluster = overlay.fetch_cluster(host, trc)
    query_vec = doc_feature_vector(provider, query_doc).vector
    scored = []
    for entry in sorted(cluster.docs):
        owner = overlay.peers[entry.owner_peer]
        doc = owner.documents[entry.doc_id]
        score = cosine(query_vec, doc_feature_vector(provider, doc).vector)
        scored.append((entry, score))
    scored.sort(key=lambda pair: (-pair[1], pair[0].doc_id))
    return QueryResult(
        trc=trc,
        peer_id=host,
        documents=scored,
        related_clusters=sorted(cluster.links),
    )


def _nearest_registered_trc(
    graph: TermProximityGraph, overlay: WebMapOverlay, terms: list[str]
) -> str | None:
    """Registered TRC with the smallest summed path distance to the query's
    in-graph terms; None when nothing is comparable."""
    anchors = [t for t in terms if t in graph.nodes]
    candidates = [t for t in overlay.registry.trcs() if t in graph.nodes]
    if not anchors or not candidates:
        return None
    totals = {c: 0.0 for c in candidates}
    for term in anchors:
        dmap = distance_map(graph, term)
        for c in candidates:
            totals[c] += dmap.get(c, UNREACHABLE_TERM_PENALTY)
    return min(candidates, key=lambda c: (totals[c], c))


def assert_overlay_invariants(overlay: WebMapOverlay) -> None:
    """Global consistency: link symmetry, registry agreement, and the
    one-cluster-per-document partition. Raises WebMapError on violation."""
    seen_docs: dict[tuple[str, str], ClusterRef] = {}
    for cluster in overlay.all_clusters():
        if overlay.registry.lookup(cluster.trc) - set(overlay.peers):
            raise WebMapError(f"registry references unknown peer for {cluster.trc!r}")
        if cluster.peer_id not in overlay.registry.lookup(cluster.trc):
            raise WebMapError(f"cluster {cluster.ref} missing from registry")
        for ref in cluster.links:
            if ref == cluster.ref:
                raise WebMapError(f"self-link on {cluster.ref}")
            try:
                other = overlay.fetch_cluster(ref.peer_id, ref.trc)
            except NotFound:
                raise WebMapError(f"dangling link {cluster.ref} -> {ref}")
            if cluster.ref not in other.links:
                raise WebMapError(f"asymmetric link {cluster.ref} -> {ref}")
        for entry in cluster.docs:
            key = (entry.owner_peer, entry.doc_id)
            if key in seen_docs:
                raise WebMapError(
                    f"document {key} attached to both {seen_docs[key]} "
                    f"and {cluster.ref}"
                )
            seen_docs[key] = cluster.ref
    for trc, peers in overlay.registry.entries.items():
        for peer_id in peers:
            if trc not in overlay.peers.get(peer_id, Peer("")).cluster_files:
                raise WebMapError(f"registry entry {trc!r}@{peer_id!r} dangling")


# -- persistence ---------------------------------------------------------


def cluster_file_path(base: str | Path, peer_id: str, trc: str) -> Path:
    return Path(base) / "clusters" / peer_id / f"{quote(trc, safe='')}.json"


def save_cluster_file(base: str | Path, cluster: ClusterFile) -> Path:
    path = cluster_file_path(base, cluster.peer_id, cluster.trc)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(cluster.to_dict(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    return path


def load_cluster_file(path: str | Path, peer_id: str) -> ClusterFile:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return ClusterFile.from_dict(data, peer_id=peer_id)
