/**
 * Re-evaluation planner: turns selection changes into panel requests.
 *
 * Control changes are debounced (sliders fire rapidly); each dispatch
 * sends exactly one /panel request per scenario, cancels whatever was
 * in flight, and only the latest generation may render. Re-submitting
 * an identical selection is a no-op with no network traffic. A failed
 * scenario keeps its previous results and surfaces the error inline.
 */

import { ApiClient, ApiError, MeasureSpecJson, PanelResponse } from "./api.js";

export interface PlannerState {
  results: Map<string, PanelResponse>;
  errors: Map<string, string>;
  pending: boolean;
}

export interface PlannerOptions {
  debounceMs?: number;
  onRender?: (state: PlannerState) => void;
}

interface PanelRequest {
  spec: MeasureSpecJson;
  distribution: string;
}

function requestKey(request: PanelRequest): string {
  return JSON.stringify(request);
}

export class EvaluationPlanner {
  private readonly debounceMs: number;
  private readonly onRender: (state: PlannerState) => void;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inflight: AbortController | null = null;
  private dispatchedKey: string | null = null;
  private pendingRequest: PanelRequest | null = null;
  private generation = 0;

  readonly state: PlannerState = {
    results: new Map(),
    errors: new Map(),
    pending: false,
  };

  constructor(
    private readonly client: ApiClient,
    private readonly scenarios: string[],
    options: PlannerOptions = {},
  ) {
    this.debounceMs = options.debounceMs ?? 150;
    this.onRender = options.onRender ?? (() => undefined);
  }

  /** Schedule a re-evaluation for a new selection (debounced). */
  update(spec: MeasureSpecJson, distribution: string): void {
    this.pendingRequest = { spec, distribution };
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => this.fire(), this.debounceMs);
  }

  private fire(): void {
    this.timer = null;
    const request = this.pendingRequest;
    if (request === null) {
      return;
    }
    const key = requestKey(request);
    if (key === this.dispatchedKey) {
      return; // identical selection: nothing to re-evaluate
    }
    this.dispatch(request, key);
  }

  private dispatch(request: PanelRequest, key: string): void {
    if (this.inflight !== null) {
      this.inflight.abort();
    }
    const controller = new AbortController();
    this.inflight = controller;
    this.dispatchedKey = key;
    const generation = ++this.generation;
    this.state.pending = true;
    this.onRender(this.state);

    let remaining = this.scenarios.length;
    const settle = () => {
      remaining -= 1;
      if (remaining === 0 && generation === this.generation) {
        this.state.pending = false;
      }
      if (generation === this.generation) {
        this.onRender(this.state);
      }
    };

    for (const scenario of this.scenarios) {
      const body: { scenario: string; spec: MeasureSpecJson; distribution?: string } = {
        scenario,
        spec: request.spec,
      };
      if (request.distribution !== "default") {
        body.distribution = request.distribution;
      }
      this.client
        .panel(body, controller.signal)
        .then((response) => {
          if (generation !== this.generation) return;
          this.state.results.set(scenario, response);
          this.state.errors.delete(scenario);
          settle();
        })
        .catch((err: unknown) => {
          if (generation !== this.generation) return;
          if (err instanceof DOMException && err.name === "AbortError") return;
          const message = err instanceof ApiError ? err.body.message : String(err);
          this.state.errors.set(scenario, message);
          settle();
        });
    }
  }
}
