// Pure view-model builders. Every displayed number is taken verbatim from
// an API field and only formatted here; nothing is recomputed client-side.

import type {
  ClusterPayload,
  MapPayload,
  SearchPayload,
  SignpostPayload,
} from "./types.js";

export interface MapNode {
  id: string; // "trc@peer"
  trc: string;
  peerId: string;
  docCount: number;
  radius: number;
}

export interface MapEdge {
  source: string;
  target: string;
}

export interface MapModel {
  nodes: MapNode[];
  edges: MapEdge[];
  empty: boolean;
}

const MIN_RADIUS = 14;
const RADIUS_PER_DOC = 3;

export function nodeId(trc: string, peerId: string): string {
  return `${trc}@${peerId}`;
}

/** Nodes sized by document count; symmetric link entries deduped to one
 * edge per unordered pair. */
export function buildMapModel(payload: MapPayload): MapModel {
  const nodes = payload.clusters.map((cluster) => ({
    id: nodeId(cluster.trc, cluster.peer_id),
    trc: cluster.trc,
    peerId: cluster.peer_id,
    docCount: cluster.doc_count,
    radius: MIN_RADIUS + RADIUS_PER_DOC * cluster.doc_count,
  }));
  const seen = new Set<string>();
  const edges: MapEdge[] = [];
  for (const link of payload.links) {
    const a = nodeId(link.a.trc, link.a.peer_id);
    const b = nodeId(link.b.trc, link.b.peer_id);
    const key = a < b ? `${a}|${b}` : `${b}|${a}`;
    if (seen.has(key) || a === b) continue;
    seen.add(key);
    edges.push(a < b ? { source: a, target: b } : { source: b, target: a });
  }
  edges.sort((x, y) =>
    x.source === y.source
      ? x.target.localeCompare(y.target)
      : x.source.localeCompare(y.source),
  );
  return { nodes, edges, empty: nodes.length === 0 };
}

export interface ClusterModel {
  trc: string;
  peerId: string;
  docs: { docId: string; title: string; url: string; ownerPeer: string }[];
  subclusters: {
    id: string;
    docs: string[];
    density: string;
    outlier: boolean;
  }[];
  related: { trc: string; peerId: string }[];
  outlierDocs: string[];
}

export function buildClusterModel(payload: ClusterPayload): ClusterModel {
  return {
    trc: payload.trc,
    peerId: payload.peer_id,
    docs: payload.docs.map((d) => ({
      docId: d.doc_id,
      title: d.title,
      url: d.url,
      ownerPeer: d.owner_peer,
    })),
    subclusters: payload.subclusters.map((s) => ({
      id: s.id,
      docs: s.docs,
      density: s.mode_density.toFixed(4),
      outlier: s.outlier,
    })),
    related: payload.related_clusters.map((r) => ({
      trc: r.trc,
      peerId: r.peer_id,
    })),
    outlierDocs: payload.subclusters
      .filter((s) => s.outlier)
      .flatMap((s) => s.docs)
      .sort(),
  };
}

export interface RankedTerm {
  term: string;
  score: string; // two decimals, descending
}

export interface FollowAction {
  toDoc: string;
  overlap: string;
}

export interface SignpostModel {
  docId: string;
  clusterTrc: string;
  keywords: RankedTerm[];
  sourceTopics: RankedTerm[];
  followActions: FollowAction[];
  emptyNote: string | null;
}

/** Two ranked, two-decimal lists plus one follow action per outgoing
 * document link. */
export function buildSignpostModel(payload: SignpostPayload): SignpostModel {
  const format = (terms: { term: string; score: number }[]) =>
    terms.map((t) => ({ term: t.term, score: t.score.toFixed(2) }));
  const actions = [...payload.links]
    .sort((a, b) => b.overlap - a.overlap || a.to.localeCompare(b.to))
    .map((l) => ({ toDoc: l.to, overlap: l.overlap.toFixed(2) }));
  const empty =
    payload.authorities.length === 0 && payload.hubs.length === 0;
  return {
    docId: payload.doc_id,
    clusterTrc: payload.cluster.trc,
    keywords: format(payload.authorities),
    sourceTopics: format(payload.hubs),
    followActions: actions,
    emptyNote: empty
      ? "No term associations: the document has too few terms."
      : null,
  };
}

export interface SearchModel {
  trc: string;
  peerId: string;
  results: { docId: string; title: string; score: string }[];
  related: { trc: string; peerId: string }[];
}

export function buildSearchModel(payload: SearchPayload): SearchModel {
  return {
    trc: payload.trc,
    peerId: payload.peer_id,
    results: payload.documents.map((d) => ({
      docId: d.doc_id,
      title: d.title,
      score: d.score.toFixed(2),
    })),
    related: payload.related_clusters.map((r) => ({
      trc: r.trc,
      peerId: r.peer_id,
    })),
  };
}
