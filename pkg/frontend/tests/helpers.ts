/** Mocked fetch backend. Fixtures are keyed by the exact request payload so a
 * test fails loudly when the app sends anything unexpected. */

import { vi } from "vitest";
import type { NetworkPayload, Posterior, TemporalPosterior } from "../src/api.js";

export interface ErrorFixture {
  __error: true;
  status: number;
  detail: string;
}

export function errorFixture(status: number, detail: string): ErrorFixture {
  return { __error: true, status, detail };
}

function isErrorFixture(value: unknown): value is ErrorFixture {
  return typeof value === "object" && value !== null && (value as ErrorFixture).__error === true;
}

export function fakeResponse(status: number, payload: unknown): Response {
  const text = JSON.stringify(payload);
  return {
    ok: status >= 200 && status < 300,
    status,
    text: async () => text,
  } as unknown as Response;
}

export interface RecordedCall {
  method: string;
  url: string;
  body: unknown;
}

interface HeldRequest {
  body: unknown;
  release: () => void;
}

export class MockApi {
  network: NetworkPayload | ErrorFixture;
  queries = new Map<string, unknown>();
  mpe = new Map<string, unknown>();
  sensitivity = new Map<string, unknown>();
  tornado = new Map<string, unknown>();
  calls: RecordedCall[] = [];

  /** While true, /v1/query responses wait until the test releases them. */
  holdQueries = false;
  held: HeldRequest[] = [];

  constructor(network: NetworkPayload) {
    this.network = network;
  }

  queryCalls(): RecordedCall[] {
    return this.calls.filter((c) => c.url.includes("/v1/query"));
  }

  install(): void {
    globalThis.fetch = vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
      const url = String(input);
      const u = new URL(url);
      const body = init?.body ? JSON.parse(String(init.body)) : undefined;
      this.calls.push({ method: init?.method ?? "GET", url, body });

      if (u.pathname === "/v1/network") {
        return this.respond(this.network);
      }
      if (u.pathname === "/v1/query") {
        if (this.holdQueries) {
          await new Promise<void>((resolve) => this.held.push({ body, release: resolve }));
        }
        return this.respond(this.queries.get(JSON.stringify(body)), "query", body);
      }
      if (u.pathname === "/v1/mpe") {
        return this.respond(this.mpe.get(JSON.stringify(body)), "mpe", body);
      }
      if (u.pathname === "/v1/sensitivity") {
        return this.respond(this.sensitivity.get(u.searchParams.get("target") ?? ""), "sensitivity");
      }
      if (u.pathname === "/v1/tornado") {
        const key = `${u.searchParams.get("target")}|${u.searchParams.get("state")}`;
        return this.respond(this.tornado.get(key), "tornado");
      }
      return fakeResponse(404, { detail: "unknown path " + u.pathname });
    }) as unknown as typeof fetch;
  }

  private respond(fixture: unknown, kind?: string, body?: unknown): Response {
    if (fixture === undefined) {
      return fakeResponse(400, { detail: `no ${kind ?? "network"} fixture for ${JSON.stringify(body)}` });
    }
    if (isErrorFixture(fixture)) {
      return fakeResponse(fixture.status, { detail: fixture.detail });
    }
    return fakeResponse(200, fixture);
  }
}

// ---- fixture builders --------------------------------------------------

export const TRI = ["Low", "Neutral", "High"];

export function buildNetwork(overrides: Partial<NetworkPayload> = {}): NetworkPayload {
  return {
    nodes: [
      { name: "A", states: TRI.slice(), baseline: [0.2, 0.3, 0.5] },
      { name: "B", states: TRI.slice(), baseline: [0.3, 0.4, 0.3] },
      { name: "C", states: TRI.slice(), baseline: [0.25, 0.5, 0.25] },
    ],
    edges: [
      { parent: "A", child: "B", diameter: 0.62, undirected_in_cpdag: false },
      { parent: "B", child: "C", diameter: 0.0, undirected_in_cpdag: true },
    ],
    target: "B",
    has_two_slice: true,
    ...overrides,
  };
}

export function posterior(
  target: string,
  dist: [number, number, number],
  evidence: Record<string, string>,
): Posterior {
  return { target, states: TRI.slice(), distribution: dist, evidence };
}

export function temporal(t: Posterior, t1: Posterior): TemporalPosterior {
  return { at_T: t, "at_T+1": t1 };
}

export async function waitFor(check: () => boolean, timeoutMs = 2000): Promise<void> {
  const start = Date.now();
  while (!check()) {
    if (Date.now() - start > timeoutMs) throw new Error("waitFor timed out");
    await new Promise((resolve) => setTimeout(resolve, 5));
  }
}
