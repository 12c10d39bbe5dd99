// Payload shapes of the engine's read-only JSON API.

export interface ClusterRef {
  trc: string;
  peer_id: string;
}

export interface MapCluster extends ClusterRef {
  doc_count: number;
}

export interface MapLink {
  a: ClusterRef;
  b: ClusterRef;
}

export interface MapPayload {
  clusters: MapCluster[];
  links: MapLink[];
}

export interface ClusterDoc {
  doc_id: string;
  url: string;
  title: string;
  owner_peer: string;
}

export interface SubclusterRecord {
  id: string;
  docs: string[];
  mode_density: number;
  outlier: boolean;
}

export interface ClusterPayload extends ClusterRef {
  docs: ClusterDoc[];
  subclusters: SubclusterRecord[];
  related_clusters: ClusterRef[];
}

export interface ScoredTerm {
  term: string;
  score: number;
}

export interface DocLink {
  from: string;
  to: string;
  overlap: number;
}

export interface SignpostPayload {
  doc_id: string;
  cluster: ClusterRef;
  authorities: ScoredTerm[];
  hubs: ScoredTerm[];
  links: DocLink[];
}

export interface TracePayload {
  doc_id: string;
  depth: number;
  chain: string[];
  hops: DocLink[];
}

export interface SearchDoc extends ClusterDoc {
  score: number;
}

export interface SearchPayload {
  query: string;
  trc: string;
  peer_id: string;
  documents: SearchDoc[];
  related_clusters: ClusterRef[];
}

export interface ErrorPayload {
  error: string;
  suggestion?: string | null;
}
