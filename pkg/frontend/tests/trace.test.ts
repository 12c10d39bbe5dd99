import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { TraceController, buildTraceView } from "../src/trace.js";
import type { TracePayload } from "../src/types.js";
import { FakeFetch, fixture } from "./helpers.js";

function tracingClient(): { api: ApiClient; fake: FakeFetch } {
  const fake = new FakeFetch()
    .routeFixture("/api/trace/sw-field?depth=5", "trace_sw-field.json")
    .routeFixture("/api/trace/sw-method?depth=5", "trace_sw-method.json");
  return { api: new ApiClient("", fake.impl()), fake };
}

describe("trace view", () => {
  it("replays the fixture chain with per-hop overlaps", () => {
    const view = buildTraceView(fixture<TracePayload>("trace_sw-field.json"));
    expect(view.steps.map((s) => s.docId)).toEqual([
      "sw-field",
      "sw-method",
      "sw-core",
    ]);
    expect(view.steps[0].overlapFromPrev).toBeNull();
    expect(view.steps[1].overlapFromPrev).toBe("0.40");
    expect(view.steps[2].overlapFromPrev).toBe("0.40");
  });

  it("controller loads, branches at a hop, and deepens", async () => {
    const { api, fake } = tracingClient();
    const controller = new TraceController(api);

    const first = await controller.start("sw-field", 5);
    expect(first.steps.map((s) => s.docId)).toEqual([
      "sw-field",
      "sw-method",
      "sw-core",
    ]);

    // branching at the middle hop issues a fresh trace from that document
    const branched = await controller.branchAt("sw-method");
    expect(branched.rootDoc).toBe("sw-method");
    expect(branched.steps.map((s) => s.docId)).toEqual([
      "sw-method",
      "sw-core",
    ]);
    expect(fake.requests.map((r) => r.url)).toEqual([
      "/api/trace/sw-field?depth=5",
      "/api/trace/sw-method?depth=5",
    ]);

    fake.routeFixture("/api/trace/sw-method?depth=10", "trace_sw-method.json");
    const deepened = await controller.deepen(5);
    expect(deepened.rootDoc).toBe("sw-method");
    expect(fake.requests.at(-1)?.url).toBe("/api/trace/sw-method?depth=10");
  });

  it("refuses to branch at a document outside the chain", async () => {
    const { api } = tracingClient();
    const controller = new TraceController(api);
    await controller.start("sw-field", 5);
    await expect(controller.branchAt("ghost")).rejects.toThrow(
      /not part of the current trace/,
    );
  });
});
