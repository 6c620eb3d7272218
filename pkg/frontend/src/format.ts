/**
 * Display formatting for panel cells: figure-style rounding to two or
 * three decimals, infinity glyphs for divergent values, rank badges.
 */

import type { PanelResult, WireValue } from "./api.js";

/** Round like the study figures: two decimals, three for small values. */
export function formatNumber(v: number): string {
  const magnitude = Math.abs(v);
  if (magnitude !== 0 && magnitude < 0.1) {
    return v.toFixed(3);
  }
  return v.toFixed(2);
}

export function formatValue(v: WireValue | null): string {
  if (v === null) return "";
  if (v === "inf") return "∞";
  if (v === "-inf") return "-∞";
  if (v === "undefined") return "undefined";
  return formatNumber(v);
}

export function formatRank(rank: number | null): string {
  return rank === null ? "" : `#${rank}`;
}

/** One badge line per estimate: "B 0.27 #2", or the error text. */
export function badgeText(cell: PanelResult): string {
  if (cell.error) {
    return `${cell.estimate} error`;
  }
  const rank = formatRank(cell.rank);
  return `${cell.estimate} ${formatValue(cell.value)}${rank ? " " + rank : ""}`;
}
