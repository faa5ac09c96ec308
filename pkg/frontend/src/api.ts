/** Typed client for the model service JSON API under /v1/. */

export interface NetworkNode {
  name: string;
  states: string[];
  baseline: number[];
}

export interface NetworkEdge {
  parent: string;
  child: string;
  diameter: number;
  undirected_in_cpdag: boolean;
}

export interface NetworkPayload {
  nodes: NetworkNode[];
  edges: NetworkEdge[];
  target: string;
  has_two_slice: boolean;
}

export interface Posterior {
  target: string;
  states: string[];
  distribution: number[];
  evidence: Record<string, string>;
}

export interface TemporalPosterior {
  at_T: Posterior;
  "at_T+1": Posterior;
}

export interface MpePayload {
  assignment: Record<string, string>;
  log_probability: number;
}

export interface SensitivityPayload {
  target: string;
  mutual_information: Record<string, number>;
  sobol: Record<string, number>;
  diameter: Record<string, number>;
  ranks: {
    mutual_information: Record<string, number>;
    sobol: Record<string, number>;
    diameter: Record<string, number>;
  };
}

export interface TornadoEntry {
  node: string;
  parent_config: string[];
  state: string;
  baseline_output: number;
  sensitivity_value: number;
  direction: number;
  one_sided: boolean;
}

export interface TornadoPayload {
  target: string;
  state: string;
  entries: TornadoEntry[];
}

export type Evidence = Record<string, string>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export interface RequestLogEntry {
  method: string;
  path: string;
  body: unknown;
  status: number;
  response: unknown;
}

function sortedEvidence(evidence: Evidence): Evidence {
  const out: Evidence = {};
  for (const k of Object.keys(evidence).sort()) out[k] = evidence[k];
  return out;
}

/** Query body with evidence keys sorted, so equal requests stringify equally. */
export function queryPayload(
  target: string,
  evidence: Evidence,
  slice: "static" | "temporal",
): { target: string; evidence: Evidence; slice: string } {
  return { target, evidence: sortedEvidence(evidence), slice };
}

export function mpePayload(evidence: Evidence): { evidence: Evidence } {
  return { evidence: sortedEvidence(evidence) };
}

export class ApiClient {
  /** Every request and response in order. Tests trace displayed numbers back to these. */
  readonly log: RequestLogEntry[] = [];
  private base: string;

  constructor(baseUrl: string) {
    this.base = baseUrl.replace(/\/+$/, "");
  }

  network(signal?: AbortSignal): Promise<NetworkPayload> {
    return this.request<NetworkPayload>("GET", "/v1/network", undefined, signal);
  }

  queryStatic(target: string, evidence: Evidence, signal?: AbortSignal): Promise<Posterior> {
    return this.request<Posterior>("POST", "/v1/query", queryPayload(target, evidence, "static"), signal);
  }

  queryTemporal(target: string, evidence: Evidence, signal?: AbortSignal): Promise<TemporalPosterior> {
    return this.request<TemporalPosterior>("POST", "/v1/query", queryPayload(target, evidence, "temporal"), signal);
  }

  mpe(evidence: Evidence, signal?: AbortSignal): Promise<MpePayload> {
    return this.request<MpePayload>("POST", "/v1/mpe", mpePayload(evidence), signal);
  }

  sensitivity(target: string, signal?: AbortSignal): Promise<SensitivityPayload> {
    const path = `/v1/sensitivity?target=${encodeURIComponent(target)}`;
    return this.request<SensitivityPayload>("GET", path, undefined, signal);
  }

  tornado(target: string, state: string, topK: number, signal?: AbortSignal): Promise<TornadoPayload> {
    const path =
      `/v1/tornado?target=${encodeURIComponent(target)}` +
      `&state=${encodeURIComponent(state)}&top_k=${topK}`;
    return this.request<TornadoPayload>("GET", path, undefined, signal);
  }

  private async request<T>(method: string, path: string, body: unknown, signal?: AbortSignal): Promise<T> {
    let res: Response;
    try {
      res = await fetch(this.base + path, {
        method,
        signal,
        headers: body === undefined ? undefined : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      if ((err as Error).name === "AbortError") throw err;
      throw new ApiError(0, `cannot reach the model service: ${(err as Error).message}`);
    }
    const text = await res.text();
    let payload: unknown = null;
    if (text) {
      try {
        payload = JSON.parse(text);
      } catch {
        payload = null;
      }
    }
    this.log.push({ method, path, body: body ?? null, status: res.status, response: payload });
    if (!res.ok) {
      const detail =
        payload !== null && typeof payload === "object" && "detail" in payload
          ? String((payload as { detail: unknown }).detail)
          : `request failed with status ${res.status}`;
      throw new ApiError(res.status, detail);
    }
    return payload as T;
  }
}
