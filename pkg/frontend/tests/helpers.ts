// Fixture loading and a recording fake fetch for offline API tests.

import { readFileSync } from "node:fs";

import type { FetchLike, FetchResponse } from "../src/api.js";

export function fixture<T>(name: string): T {
  const url = new URL(`../fixtures/${name}`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf-8")) as T;
}

export interface RecordedRequest {
  url: string;
  method: string;
}

export class FakeFetch {
  readonly requests: RecordedRequest[] = [];
  private readonly routes = new Map<string, { status: number; body: unknown }>();

  route(url: string, body: unknown, status = 200): this {
    this.routes.set(url, { status, body });
    return this;
  }

  routeFixture(url: string, name: string, status = 200): this {
    return this.route(url, fixture(name), status);
  }

  impl(): FetchLike {
    return (url, init) => {
      this.requests.push({ url, method: init?.method ?? "GET" });
      const hit = this.routes.get(url);
      if (!hit) {
        const body = { error: `not found: ${url}` };
        return Promise.resolve(makeResponse(404, body));
      }
      return Promise.resolve(makeResponse(hit.status, hit.body));
    };
  }

  methodsUsed(): string[] {
    return [...new Set(this.requests.map((r) => r.method))];
  }
}

function makeResponse(status: number, body: unknown): FetchResponse {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: () => Promise.resolve(body),
  };
}
