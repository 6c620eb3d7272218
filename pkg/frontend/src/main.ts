/**
 * Explorer bootstrap: build aspect controls from the server schema,
 * load scenario curves once, and wire control changes to the planner.
 */

import { ApiClient, ScenarioDetail } from "./api.js";
import { EvaluationPlanner, PlannerState } from "./planner.js";
import {
  activeControls,
  aggregationOptions,
  AspectSelection,
  defaultSelection,
  isLegal,
  normalize,
  toSpec,
} from "./selection.js";
import { renderDensity, renderScenarioCard } from "./render.js";

const LABELS: Record<string, string> = {
  function: "f(x)",
  first_derivative: "f'(x)",
  second_derivative: "f''(x)",
  difference: "difference",
  absolute: "absolute",
  squared: "squared",
  eps_accuracy: "eps accuracy",
  integral_dx: "integral dx",
  expectation_dFx: "expectation dF",
  quantile_Fx: "quantile of F",
  precision_weighted: "precision weighted",
  max: "max",
  min: "min",
  num_roots: "root count",
  argmax_location: "argmax location",
  argmin_location: "argmin location",
  range: "range",
  point: "point",
  full: "whole range",
  quantile_band: "quantile band",
  default: "scenario default",
  beta_2_2: "Beta(2,2)",
  beta_2_5: "Beta(2,5)",
  beta_5_2: "Beta(5,2)",
};

function label(option: string): string {
  return LABELS[option] ?? option;
}

function radioGroup(
  host: HTMLElement,
  name: string,
  options: string[],
  selected: string,
  onPick: (value: string) => void,
): void {
  host.replaceChildren();
  for (const option of options) {
    const wrap = document.createElement("label");
    const input = document.createElement("input");
    input.type = "radio";
    input.name = name;
    input.value = option;
    input.checked = option === selected;
    input.addEventListener("change", () => onPick(option));
    wrap.appendChild(input);
    wrap.appendChild(document.createTextNode(label(option)));
    host.appendChild(wrap);
  }
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function init(): Promise<void> {
  const client = new ApiClient("..");
  const [schema, listing] = await Promise.all([client.schema(), client.scenarios()]);
  const names = listing.scenarios.map((s) => s.name);
  const details = new Map<string, ScenarioDetail>();
  await Promise.all(
    names.map(async (name) => {
      details.set(name, await client.scenario(name));
    }),
  );

  const cardsHost = el<HTMLElement>("cards");
  for (const name of names) {
    const card = document.createElement("section");
    card.className = "card";
    card.dataset.scenario = name;
    const title = document.createElement("h3");
    title.textContent = `${details.get(name)!.title} (${name})`;
    card.appendChild(title);
    for (const cls of ["plot", "badges", "error-strip"]) {
      const div = document.createElement("div");
      div.className = cls;
      card.appendChild(div);
    }
    cardsHost.appendChild(card);
  }

  let selection = defaultSelection();

  const planner = new EvaluationPlanner(client, names, {
    onRender: (state) => renderAll(state),
  });

  function renderAll(state: PlannerState): void {
    document.body.classList.toggle("pending", state.pending);
    const showGuides = selection.localization === "range" && selection.scopeKind === "quantile_band";
    for (const name of names) {
      const card = cardsHost.querySelector<HTMLElement>(`[data-scenario="${name}"]`);
      if (!card) continue;
      renderScenarioCard(
        card,
        details.get(name)!,
        state.results.get(name),
        state.errors.get(name),
        showGuides,
      );
    }
    const first = details.get(names[0])!;
    const descriptor =
      selection.distribution === "default"
        ? first.distribution
        : first.distribution_options[selection.distribution];
    renderDensity(el("density"), descriptor);
  }

  function apply(change: Partial<AspectSelection>): void {
    const previous = selection;
    selection = normalize(schema, { ...selection, ...change });
    rebuildControls();
    if (!isLegal(schema, selection)) {
      return; // never submit what the server would reject
    }
    if (
      selection.distribution === previous.distribution &&
      JSON.stringify(toSpec(selection)) === JSON.stringify(toSpec(previous)) &&
      planner.state.results.size > 0
    ) {
      return; // no effective change
    }
    planner.update(toSpec(selection), selection.distribution);
  }

  function rebuildControls(): void {
    const active = activeControls(selection);
    radioGroup(el("ctl-localization"), "localization", schema.localization, selection.localization,
      (v) => apply({ localization: v }));
    radioGroup(el("ctl-characteristic"), "characteristic", schema.characteristic,
      selection.characteristic, (v) => apply({ characteristic: v }));
    radioGroup(el("ctl-loss"), "loss", schema.loss, selection.loss, (v) => apply({ loss: v }));
    radioGroup(el("ctl-axis"), "axis", schema.axis, selection.axis, (v) => apply({ axis: v }));
    radioGroup(el("ctl-aggregation"), "aggregation", aggregationOptions(schema, selection),
      selection.aggregation, (v) => apply({ aggregation: v }));
    radioGroup(el("ctl-scope"), "scope", ["full", "quantile_band"], selection.scopeKind,
      (v) => apply({ scopeKind: v as AspectSelection["scopeKind"] }));
    radioGroup(el("ctl-distribution"), "distribution", schema.distributions,
      selection.distribution, (v) => apply({ distribution: v }));

    el<HTMLElement>("row-axis").hidden = !active.has("axis");
    el<HTMLElement>("row-aggregation").hidden = !active.has("aggregation");
    el<HTMLElement>("row-scope").hidden = !active.has("scope");
    el<HTMLElement>("row-q").hidden = !active.has("q");
    el<HTMLElement>("row-epsilon").hidden = !active.has("epsilon");
    el<HTMLElement>("row-x-star").hidden = !active.has("x_star");

    el<HTMLInputElement>("input-q").value = String(selection.q);
    el<HTMLInputElement>("input-x-star").value = String(selection.xStar);
    el<HTMLInputElement>("input-epsilon").value = selection.epsilon;
  }

  el<HTMLInputElement>("input-q").addEventListener("input", (ev) =>
    apply({ q: Number((ev.target as HTMLInputElement).value) }),
  );
  el<HTMLInputElement>("input-x-star").addEventListener("input", (ev) =>
    apply({ xStar: Number((ev.target as HTMLInputElement).value) }),
  );
  el<HTMLInputElement>("input-epsilon").addEventListener("input", (ev) =>
    apply({ epsilon: (ev.target as HTMLInputElement).value }),
  );

  rebuildControls();
  renderAll(planner.state);
  planner.update(toSpec(selection), selection.distribution);
}

init().catch((err) => {
  const banner = document.getElementById("boot-error");
  if (banner) {
    banner.textContent = `failed to load: ${err}`;
    banner.removeAttribute("hidden");
  }
});
