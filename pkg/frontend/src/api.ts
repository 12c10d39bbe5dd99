// Thin GET-only client for the engine API. The fetch implementation is
// injectable so tests can run against recorded fixtures.

import type {
  ClusterPayload,
  ErrorPayload,
  MapPayload,
  SearchPayload,
  SignpostPayload,
  TracePayload,
} from "./types.js";

export interface FetchResponse {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string },
) => Promise<FetchResponse>;

export class ApiError extends Error {
  readonly status: number;
  readonly suggestion: string | null;

  constructor(status: number, payload: ErrorPayload) {
    super(payload.error);
    this.status = status;
    this.suggestion = payload.suggestion ?? null;
  }
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl =
      fetchImpl ?? ((url, init) => globalThis.fetch(url, init));
  }

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method: "GET",
    });
    const payload = (await response.json()) as T | ErrorPayload;
    if (!response.ok) {
      const error = payload as ErrorPayload;
      throw new ApiError(response.status, {
        error: error.error ?? `request failed (${response.status})`,
        suggestion: error.suggestion ?? null,
      });
    }
    return payload as T;
  }

  health(): Promise<{ status: string }> {
    return this.get("/api/health");
  }

  map(): Promise<MapPayload> {
    return this.get("/api/map");
  }

  cluster(trc: string, peer?: string): Promise<ClusterPayload> {
    const query = peer ? `?peer=${encodeURIComponent(peer)}` : "";
    return this.get(`/api/cluster/${encodeURIComponent(trc)}${query}`);
  }

  signpost(docId: string): Promise<SignpostPayload> {
    return this.get(`/api/doc/${encodeURIComponent(docId)}/signpost`);
  }

  trace(docId: string, depth: number): Promise<TracePayload> {
    return this.get(`/api/trace/${encodeURIComponent(docId)}?depth=${depth}`);
  }

  search(query: string): Promise<SearchPayload> {
    return this.get(`/api/search?q=${encodeURIComponent(query)}`);
  }
}
