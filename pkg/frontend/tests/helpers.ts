/**
 * Test fixtures: the measure schema as the service publishes it, panel
 * response builders, and a fake fetch that records calls and can hold
 * responses open to exercise cancellation.
 */

import type {
  FetchLike,
  MeasureSchema,
  MeasureSpecJson,
  PanelResponse,
  PanelResult,
} from "../src/api.js";

export const SCHEMA: MeasureSchema = {
  localization: ["range", "point"],
  characteristic: ["function", "first_derivative", "second_derivative"],
  loss: ["difference", "absolute", "squared", "eps_accuracy"],
  axis: ["Y", "X"],
  aggregation: {
    Y: ["integral_dx", "expectation_dFx", "quantile_Fx", "precision_weighted", "max", "min"],
    X: ["num_roots", "argmax_location", "argmin_location"],
  },
  scope_kinds: ["full", "quantile_band", "interval"],
  distributions: ["default", "beta_2_2", "beta_2_5", "beta_5_2"],
  rules: {
    point: { requires: ["x_star"], forbids: ["axis", "aggregation", "scope", "q"] },
    range: { requires: ["axis", "aggregation"], forbids: ["x_star"] },
    eps_accuracy: { optional: ["epsilon"] },
    quantile_Fx: { requires: ["q"] },
    precision_weighted: { requires: ["precision"] },
  },
};

export const SCENARIOS = ["sigmoid", "unimodal", "asymptote", "rebound"];

export function panelResponse(
  scenario: string,
  spec: MeasureSpecJson,
  results: PanelResult[],
): PanelResponse {
  return {
    scenario,
    measure: { ...spec, label: `label:${spec.characteristic}:${spec.loss}`, direction: "smaller" },
    scope: spec.scope?.kind === "quantile_band" ? [0.135, 0.865] : [0, 1],
    results,
  };
}

export function rankedResults(ranks: number[]): PanelResult[] {
  return ranks.map((rank, i) => ({
    estimate: "ABCDE"[i],
    value: (rank * 0.11) as number,
    divergent: false,
    rank,
  }));
}

interface RecordedCall {
  url: string;
  body: { scenario: string; spec: MeasureSpecJson; distribution?: string };
}

type Responder = (call: RecordedCall) => PanelResponse | { status: number; body: unknown };

/** Fake network for /panel: records calls, honors AbortSignal, can defer. */
export class FakePanelServer {
  readonly calls: RecordedCall[] = [];
  private held: Array<{
    call: RecordedCall;
    resolve: (r: Response) => void;
    reject: (e: unknown) => void;
  }> = [];
  holdResponses = false;
  respond: Responder;

  constructor(respond?: Responder) {
    this.respond =
      respond ??
      ((call) => panelResponse(call.body.scenario, call.body.spec, rankedResults([1, 2, 3, 4, 5])));
  }

  private materialize(call: RecordedCall): Response {
    const out = this.respond(call);
    if ("status" in out && typeof out.status === "number" && "body" in out) {
      return new Response(JSON.stringify(out.body), {
        status: out.status,
        headers: { "content-type": "application/json" },
      });
    }
    return new Response(JSON.stringify(out), {
      status: 200,
      headers: { "content-type": "application/json" },
    });
  }

  /** Release every held response in arrival order. */
  releaseAll(): void {
    const held = this.held;
    this.held = [];
    for (const entry of held) {
      entry.resolve(this.materialize(entry.call));
    }
  }

  fetch: FetchLike = (url, init) => {
    const call: RecordedCall = { url, body: JSON.parse(String(init?.body ?? "{}")) };
    this.calls.push(call);
    const signal = init?.signal;
    if (!this.holdResponses) {
      if (signal?.aborted) {
        return Promise.reject(new DOMException("aborted", "AbortError"));
      }
      return Promise.resolve(this.materialize(call));
    }
    return new Promise<Response>((resolve, reject) => {
      const entry = { call, resolve, reject };
      this.held.push(entry);
      signal?.addEventListener("abort", () => {
        this.held = this.held.filter((h) => h !== entry);
        reject(new DOMException("aborted", "AbortError"));
      });
    });
  };
}

/** Drain pending promise callbacks; Response.json() chains several ticks. */
export async function flushMicrotasks(rounds = 32): Promise<void> {
  for (let i = 0; i < rounds; i++) {
    await Promise.resolve();
  }
}
