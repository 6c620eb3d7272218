/**
 * UI selection state and its mapping to measure specs.
 *
 * Legality mirrors the server rules exposed by /measures/schema: controls
 * that would produce a 400 are disabled before they can be selected, so
 * the client never submits an illegal combination.
 */

import type { MeasureSchema, MeasureSpecJson, ScopeJson } from "./api.js";

export interface AspectSelection {
  localization: string;
  characteristic: string;
  loss: string;
  axis: string;
  aggregation: string;
  scopeKind: "full" | "quantile_band";
  bandL: number;
  bandU: number;
  /** Empty string means "server default" (per-scenario epsilon). */
  epsilon: string;
  q: number;
  xStar: number;
  distribution: string;
}

/** Starting point: the plain absolute-error integral over the whole range. */
export function defaultSelection(): AspectSelection {
  return {
    localization: "range",
    characteristic: "function",
    loss: "absolute",
    axis: "Y",
    aggregation: "integral_dx",
    scopeKind: "full",
    bandL: 0.05,
    bandU: 0.95,
    epsilon: "",
    q: 0.5,
    xStar: 0.5,
    distribution: "default",
  };
}

export type ControlName =
  | "characteristic"
  | "loss"
  | "axis"
  | "aggregation"
  | "scope"
  | "epsilon"
  | "q"
  | "x_star";

/**
 * Which controls apply to the current selection. Hidden controls keep
 * their state but are neither rendered as active nor serialized.
 */
export function activeControls(selection: AspectSelection): Set<ControlName> {
  const active = new Set<ControlName>(["characteristic", "loss"]);
  if (selection.localization === "point") {
    active.add("x_star");
  } else {
    active.add("axis");
    active.add("aggregation");
    active.add("scope");
    if (selection.aggregation === "quantile_Fx") {
      active.add("q");
    }
  }
  if (selection.loss === "eps_accuracy") {
    active.add("epsilon");
  }
  return active;
}

/** Aggregation options legal for the current axis. */
export function aggregationOptions(schema: MeasureSchema, selection: AspectSelection): string[] {
  if (selection.localization === "point") {
    return [];
  }
  return selection.axis === "X" ? schema.aggregation.X : schema.aggregation.Y;
}

/**
 * Repair a selection after one field changed, so every dependent field
 * is legal again (e.g. switching axis swaps the aggregation menu).
 */
export function normalize(schema: MeasureSchema, selection: AspectSelection): AspectSelection {
  const out = { ...selection };
  if (out.localization === "range") {
    const legal = aggregationOptions(schema, out);
    if (!legal.includes(out.aggregation)) {
      out.aggregation = legal[0];
    }
  }
  if (out.bandL >= out.bandU) {
    [out.bandL, out.bandU] = [Math.min(out.bandL, out.bandU), Math.max(out.bandL, out.bandU)];
    if (out.bandL === out.bandU) {
      out.bandL = Math.max(0, out.bandU - 0.05);
    }
  }
  return out;
}

function scopeOf(selection: AspectSelection): ScopeJson {
  if (selection.scopeKind === "quantile_band") {
    return { kind: "quantile_band", l: selection.bandL, u: selection.bandU };
  }
  return { kind: "full" };
}

/** Serialize the selection as the measure spec the service accepts. */
export function toSpec(selection: AspectSelection): MeasureSpecJson {
  const spec: MeasureSpecJson = {
    localization: selection.localization as MeasureSpecJson["localization"],
    characteristic: selection.characteristic as MeasureSpecJson["characteristic"],
    loss: selection.loss as MeasureSpecJson["loss"],
  };
  if (selection.localization === "point") {
    spec.x_star = selection.xStar;
  } else {
    spec.axis = selection.axis as "Y" | "X";
    spec.aggregation = selection.aggregation;
    spec.scope = scopeOf(selection);
    if (selection.aggregation === "quantile_Fx") {
      spec.q = selection.q;
    }
  }
  if (selection.loss === "eps_accuracy" && selection.epsilon !== "") {
    spec.epsilon = Number(selection.epsilon);
  }
  return spec;
}

/** Client-side legality; a strict subset of the server's validation. */
export function isLegal(schema: MeasureSchema, selection: AspectSelection): boolean {
  if (!schema.localization.includes(selection.localization)) return false;
  if (!schema.characteristic.includes(selection.characteristic)) return false;
  if (!schema.loss.includes(selection.loss)) return false;
  if (selection.localization === "point") {
    return Number.isFinite(selection.xStar);
  }
  if (!schema.axis.includes(selection.axis)) return false;
  if (!aggregationOptions(schema, selection).includes(selection.aggregation)) return false;
  if (selection.aggregation === "quantile_Fx" && !(selection.q > 0 && selection.q < 1)) {
    return false;
  }
  if (selection.scopeKind === "quantile_band" && !(selection.bandL < selection.bandU)) {
    return false;
  }
  if (selection.loss === "eps_accuracy" && selection.epsilon !== "") {
    if (!(Number(selection.epsilon) > 0)) return false;
  }
  return true;
}
