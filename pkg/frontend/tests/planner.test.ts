import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient, MeasureSpecJson } from "../src/api.js";
import { EvaluationPlanner } from "../src/planner.js";
import { defaultSelection, toSpec } from "../src/selection.js";
import { FakePanelServer, flushMicrotasks, panelResponse, rankedResults, SCENARIOS } from "./helpers.js";

function makePlanner(server: FakePanelServer) {
  const client = new ApiClient("", server.fetch);
  return new EvaluationPlanner(client, SCENARIOS);
}

const BASE_SPEC = toSpec(defaultSelection());

async function settle(ms = 151): Promise<void> {
  await vi.advanceTimersByTimeAsync(ms);
  await flushMicrotasks();
}

beforeEach(() => {
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

describe("re-evaluation planning", () => {
  it("sends exactly one panel request per scenario per committed change", async () => {
    const server = new FakePanelServer();
    const planner = makePlanner(server);

    planner.update(BASE_SPEC, "default");
    await settle();
    expect(server.calls.length).toBe(SCENARIOS.length);
    expect(server.calls.map((c) => c.body.scenario)).toEqual(SCENARIOS);

    // the appendix workflow: switch characteristic to the first derivative
    const switched: MeasureSpecJson = { ...BASE_SPEC, characteristic: "first_derivative" };
    planner.update(switched, "default");
    await settle();
    expect(server.calls.length).toBe(2 * SCENARIOS.length);
    const second = server.calls.slice(SCENARIOS.length);
    expect(second.map((c) => c.body.scenario)).toEqual(SCENARIOS);
    for (const call of second) {
      expect(call.body.spec.characteristic).toBe("first_derivative");
    }
  });

  it("displays the ranks exactly as the server sent them", async () => {
    const ranksByScenario: Record<string, number[]> = {
      sigmoid: [2, 1, 3, 4, 5],
      unimodal: [1, 1, 3, 4, 5],
      asymptote: [1, 3, 2, 5, 4],
      rebound: [5, 4, 3, 2, 1],
    };
    const server = new FakePanelServer((call) =>
      panelResponse(call.body.scenario, call.body.spec, rankedResults(ranksByScenario[call.body.scenario])),
    );
    const planner = makePlanner(server);
    planner.update(BASE_SPEC, "default");
    await settle();
    for (const scenario of SCENARIOS) {
      const shown = planner.state.results.get(scenario)!.results.map((r) => r.rank);
      expect(shown).toEqual(ranksByScenario[scenario]);
    }
  });

  it("coalesces rapid changes into a single dispatch", async () => {
    const server = new FakePanelServer();
    const planner = makePlanner(server);
    for (const q of [0.3, 0.4, 0.5, 0.6]) {
      planner.update({ ...BASE_SPEC, aggregation: "quantile_Fx", q }, "default");
      await vi.advanceTimersByTimeAsync(100); // each event lands inside the debounce window
    }
    expect(server.calls.length).toBe(0);
    await settle();
    expect(server.calls.length).toBe(SCENARIOS.length);
    for (const call of server.calls) {
      expect(call.body.spec.q).toBe(0.6); // only the final slider position fires
    }
  });

  it("re-selecting the same distribution is a no-op with no network call", async () => {
    const server = new FakePanelServer();
    const planner = makePlanner(server);
    planner.update(BASE_SPEC, "beta_2_2");
    await settle();
    expect(server.calls.length).toBe(SCENARIOS.length);
    for (const call of server.calls) {
      expect(call.body.distribution).toBe("beta_2_2");
    }

    planner.update(BASE_SPEC, "beta_2_2");
    await settle();
    expect(server.calls.length).toBe(SCENARIOS.length);
  });

  it("bouncing back to the already-displayed selection sends nothing", async () => {
    const server = new FakePanelServer();
    const planner = makePlanner(server);
    planner.update(BASE_SPEC, "default");
    await settle();
    const before = server.calls.length;

    planner.update({ ...BASE_SPEC, loss: "squared" }, "default");
    await vi.advanceTimersByTimeAsync(80);
    planner.update(BASE_SPEC, "default"); // undo before the debounce fires
    await settle();
    expect(server.calls.length).toBe(before);
  });

  it("omits the distribution field for the scenario default", async () => {
    const server = new FakePanelServer();
    const planner = makePlanner(server);
    planner.update(BASE_SPEC, "default");
    await settle();
    for (const call of server.calls) {
      expect("distribution" in call.body).toBe(false);
    }
  });

  it("cancels in-flight requests and renders only the latest response", async () => {
    const server = new FakePanelServer();
    server.holdResponses = true;
    const planner = makePlanner(server);

    planner.update(BASE_SPEC, "default");
    await settle();
    expect(server.calls.length).toBe(SCENARIOS.length);

    const switched: MeasureSpecJson = { ...BASE_SPEC, loss: "squared" };
    planner.update(switched, "default");
    await settle(); // aborts the first generation while it is still open
    expect(server.calls.length).toBe(2 * SCENARIOS.length);

    server.releaseAll(); // only the second generation is still held
    await flushMicrotasks();
    for (const scenario of SCENARIOS) {
      expect(planner.state.results.get(scenario)!.measure.loss).toBe("squared");
    }
    expect(planner.state.errors.size).toBe(0);
  });

  it("surfaces server errors inline without clearing prior results", async () => {
    let failFor: string | null = null;
    const server = new FakePanelServer((call) => {
      if (call.body.scenario === failFor) {
        return {
          status: 422,
          body: { code: "degenerate_scope", message: "band collapsed", field: "scope" },
        };
      }
      return panelResponse(call.body.scenario, call.body.spec, rankedResults([1, 2, 3, 4, 5]));
    });
    const planner = makePlanner(server);

    planner.update(BASE_SPEC, "default");
    await settle();
    expect(planner.state.results.size).toBe(SCENARIOS.length);

    failFor = "asymptote";
    planner.update({ ...BASE_SPEC, loss: "squared" }, "default");
    await settle();

    expect(planner.state.errors.get("asymptote")).toBe("band collapsed");
    const kept = planner.state.results.get("asymptote")!;
    expect(kept.measure.loss).toBe("absolute"); // previous result still shown
    expect(planner.state.results.get("sigmoid")!.measure.loss).toBe("squared");

    failFor = null;
    planner.update(BASE_SPEC, "default");
    await settle();
    expect(planner.state.errors.size).toBe(0);
  });

  it("tracks pending state across a dispatch", async () => {
    const server = new FakePanelServer();
    server.holdResponses = true;
    const planner = makePlanner(server);
    planner.update(BASE_SPEC, "default");
    await settle();
    expect(planner.state.pending).toBe(true);
    server.releaseAll();
    await flushMicrotasks();
    expect(planner.state.pending).toBe(false);
  });
});
