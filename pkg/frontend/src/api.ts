/**
 * Typed client for the measure service HTTP API.
 *
 * All numerics live server-side; this file only moves JSON. The fetch
 * implementation is injected so tests can fake the network.
 */

export interface ScopeJson {
  kind: "full" | "quantile_band" | "interval";
  l?: number;
  u?: number;
  lo?: number;
  hi?: number;
}

export interface MeasureSpecJson {
  localization: "range" | "point";
  characteristic: "function" | "first_derivative" | "second_derivative";
  loss: "difference" | "absolute" | "squared" | "eps_accuracy";
  axis?: "Y" | "X";
  aggregation?: string;
  scope?: ScopeJson;
  epsilon?: number;
  q?: number;
  x_star?: number;
}

/** Non-finite values travel as the strings "inf", "-inf", "undefined". */
export type WireValue = number | "inf" | "-inf" | "undefined";

export interface Sampled {
  x: number[];
  y: number[];
}

export interface DistributionDescriptor {
  kind: string;
  domain: [number, number];
  alpha?: number;
  beta?: number;
  density?: Sampled;
  q05: number;
  q95: number;
}

export interface ScenarioSummary {
  name: string;
  title: string;
  domain: [number, number];
  estimates: string[];
  has_precision: string[];
}

export interface ScenarioDetail {
  name: string;
  title: string;
  domain: [number, number];
  truth: Sampled;
  estimates: Record<string, Sampled>;
  precision: Record<string, Sampled>;
  distribution: DistributionDescriptor;
  distribution_options: Record<string, DistributionDescriptor>;
}

export interface PanelResult {
  estimate: string;
  value: WireValue | null;
  divergent: boolean;
  n_nonfinite?: number;
  rank: number | null;
  error?: string;
}

export interface PanelResponse {
  scenario: string;
  measure: MeasureSpecJson & { label: string; direction: string };
  scope: [number, number] | null;
  results: PanelResult[];
}

export interface MeasureSchema {
  localization: string[];
  characteristic: string[];
  loss: string[];
  axis: string[];
  aggregation: { Y: string[]; X: string[] };
  scope_kinds: string[];
  distributions: string[];
  rules: Record<string, { requires?: string[]; forbids?: string[]; optional?: string[] }>;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  field: string | null;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiErrorBody,
  ) {
    super(body.message);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function asJson<T>(response: Response): Promise<T> {
  const data = await response.json();
  if (!response.ok) {
    throw new ApiError(response.status, data as ApiErrorBody);
  }
  return data as T;
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  scenarios(): Promise<{ scenarios: ScenarioSummary[] }> {
    return this.fetchImpl(`${this.base}/scenarios`).then((r) => asJson(r));
  }

  scenario(name: string): Promise<ScenarioDetail> {
    return this.fetchImpl(`${this.base}/scenarios/${encodeURIComponent(name)}`).then((r) =>
      asJson(r),
    );
  }

  schema(): Promise<MeasureSchema> {
    return this.fetchImpl(`${this.base}/measures/schema`).then((r) => asJson(r));
  }

  panel(
    body: { scenario: string; spec: MeasureSpecJson; distribution?: string },
    signal?: AbortSignal,
  ): Promise<PanelResponse> {
    return this.fetchImpl(`${this.base}/panel`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
      signal,
    }).then((r) => asJson(r));
  }
}
