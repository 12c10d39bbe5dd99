// Interactive topic tracing: replay a chain hop by hop, deepen it, or
// branch into a fresh trace from any hop.

import type { ApiClient } from "./api.js";
import type { TracePayload } from "./types.js";

export interface TraceStep {
  docId: string;
  /** overlap of the link that led here; null for the root */
  overlapFromPrev: string | null;
}

export interface TraceView {
  rootDoc: string;
  depth: number;
  steps: TraceStep[];
}

export function buildTraceView(payload: TracePayload): TraceView {
  const overlapByTarget = new Map<string, number>();
  for (const hop of payload.hops) {
    overlapByTarget.set(`${hop.from}->${hop.to}`, hop.overlap);
  }
  const steps = payload.chain.map((docId, index) => {
    if (index === 0) return { docId, overlapFromPrev: null };
    const key = `${payload.chain[index - 1]}->${docId}`;
    const overlap = overlapByTarget.get(key);
    return {
      docId,
      overlapFromPrev: overlap === undefined ? null : overlap.toFixed(2),
    };
  });
  return { rootDoc: payload.doc_id, depth: payload.depth, steps };
}

export class TraceController {
  private readonly api: ApiClient;
  private view: TraceView | null = null;

  constructor(api: ApiClient) {
    this.api = api;
  }

  current(): TraceView | null {
    return this.view;
  }

  async start(docId: string, depth: number): Promise<TraceView> {
    this.view = buildTraceView(await this.api.trace(docId, depth));
    return this.view;
  }

  /** Re-request the current root with a larger depth budget. */
  async deepen(extraDepth: number): Promise<TraceView> {
    if (!this.view) throw new Error("no active trace");
    return this.start(this.view.rootDoc, this.view.depth + extraDepth);
  }

  /** Branch: a new trace rooted at one of the visited hops. */
  async branchAt(docId: string): Promise<TraceView> {
    if (!this.view) throw new Error("no active trace");
    if (!this.view.steps.some((s) => s.docId === docId)) {
      throw new Error(`document ${docId} is not part of the current trace`);
    }
    return this.start(docId, this.view.depth);
  }
}
