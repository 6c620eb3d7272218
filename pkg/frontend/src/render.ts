/**
 * Thin SVG/DOM rendering: scenario cards with curve plots, rank badges,
 * quantile guides and the distribution density thumbnail. No numerics
 * beyond coordinate scaling; values and ranks come from the server.
 */

import type { DistributionDescriptor, PanelResponse, Sampled, ScenarioDetail } from "./api.js";
import { badgeText } from "./format.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const ESTIMATE_COLORS = ["#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd"];

export function estimateColor(index: number): string {
  return ESTIMATE_COLORS[index % ESTIMATE_COLORS.length];
}

interface Viewport {
  width: number;
  height: number;
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

function viewportFor(detail: ScenarioDetail, width: number, height: number): Viewport {
  const ys: number[] = [...detail.truth.y];
  for (const sampled of Object.values(detail.estimates)) {
    ys.push(...sampled.y);
  }
  let y0 = Math.min(...ys);
  let y1 = Math.max(...ys);
  const pad = (y1 - y0 || 1) * 0.08;
  y0 -= pad;
  y1 += pad;
  return { width, height, x0: detail.domain[0], x1: detail.domain[1], y0, y1 };
}

function toPath(sampled: Sampled, vp: Viewport): string {
  const sx = (x: number) => ((x - vp.x0) / (vp.x1 - vp.x0)) * vp.width;
  const sy = (y: number) => vp.height - ((y - vp.y0) / (vp.y1 - vp.y0)) * vp.height;
  return sampled.x.map((x, i) => `${sx(x).toFixed(1)},${sy(sampled.y[i]).toFixed(1)}`).join(" ");
}

function polyline(doc: Document, points: string, stroke: string, extra?: Record<string, string>) {
  const el = doc.createElementNS(SVG_NS, "polyline");
  el.setAttribute("points", points);
  el.setAttribute("fill", "none");
  el.setAttribute("stroke", stroke);
  el.setAttribute("stroke-width", "1.6");
  for (const [k, v] of Object.entries(extra ?? {})) {
    el.setAttribute(k, v);
  }
  return el;
}

/**
 * Redraw one scenario card. Keeps existing plot content when the panel
 * response is missing (startup) and keeps the last good badges when the
 * scenario is in an error state; the error shows in its own strip.
 */
export function renderScenarioCard(
  card: HTMLElement,
  detail: ScenarioDetail,
  panel: PanelResponse | undefined,
  error: string | undefined,
  showGuides: boolean,
): void {
  const doc = card.ownerDocument;
  const plot = card.querySelector<HTMLElement>(".plot");
  if (plot) {
    const width = 360;
    const height = 210;
    const vp = viewportFor(detail, width, height);
    const svg = doc.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    const names = Object.keys(detail.estimates);
    names.forEach((name, i) => {
      svg.appendChild(polyline(doc, toPath(detail.estimates[name], vp), estimateColor(i)));
    });
    svg.appendChild(polyline(doc, toPath(detail.truth, vp), "#000", { "stroke-width": "2.2" }));
    if (showGuides && panel?.scope) {
      for (const x of panel.scope) {
        const gx = (((x - vp.x0) / (vp.x1 - vp.x0)) * width).toFixed(1);
        const line = doc.createElementNS(SVG_NS, "line");
        line.setAttribute("x1", gx);
        line.setAttribute("x2", gx);
        line.setAttribute("y1", "0");
        line.setAttribute("y2", String(height));
        line.setAttribute("stroke", "#555");
        line.setAttribute("stroke-dasharray", "5,4");
        svg.appendChild(line);
      }
    }
    plot.replaceChildren(svg);
  }

  const badges = card.querySelector<HTMLElement>(".badges");
  if (badges && panel) {
    badges.replaceChildren();
    panel.results.forEach((cell, i) => {
      const badge = doc.createElement("span");
      badge.className = "badge" + (cell.divergent ? " divergent" : "");
      const swatch = doc.createElement("i");
      swatch.style.background = estimateColor(i);
      badge.appendChild(swatch);
      badge.appendChild(doc.createTextNode(badgeText(cell)));
      if (cell.error) {
        badge.title = cell.error;
        badge.classList.add("cell-error");
      }
      badges.appendChild(badge);
    });
  }

  const strip = card.querySelector<HTMLElement>(".error-strip");
  if (strip) {
    strip.textContent = error ?? "";
    strip.hidden = !error;
  }
}

/** Small density thumbnail for the active predictor distribution. */
export function renderDensity(host: HTMLElement, descriptor: DistributionDescriptor): void {
  const doc = host.ownerDocument;
  const width = 160;
  const height = 60;
  const svg = doc.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  if (descriptor.density) {
    const top = Math.max(...descriptor.density.y) || 1;
    const vp: Viewport = {
      width,
      height,
      x0: descriptor.domain[0],
      x1: descriptor.domain[1],
      y0: 0,
      y1: top * 1.05,
    };
    svg.appendChild(polyline(doc, toPath(descriptor.density, vp), "#1f77b4"));
  }
  host.replaceChildren(svg);
  const label = descriptor.alpha !== undefined
    ? `Beta(${descriptor.alpha}, ${descriptor.beta})`
    : descriptor.kind;
  svg.setAttribute("aria-label", `density ${label}`);
}
