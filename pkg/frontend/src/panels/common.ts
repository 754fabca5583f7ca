/** Shared plot frame: margins, linear scales, border and extreme-value tick
 * labels. Tick labels sit at the data (or spec-supplied) domain endpoints,
 * so every number shown is traceable to an input. */

import { ScaleLinear, scaleLinear } from "d3-scale";
import { FONT_SIZE, SvgDoc, fmt } from "../svg.js";

export interface RenderResult {
  svg: string;
  /** Data-space values of every mark, for the no-derived-numbers lint. */
  plotted: number[];
}

export interface PanelOptions {
  title?: string;
  xRange?: [number, number];
  yRange?: [number, number];
}

export const WIDTH = 640;
export const HEIGHT = 420;
export const MARGIN = { left: 70, right: 70, top: 40, bottom: 45 };

export interface PlotFrame {
  doc: SvgDoc;
  x: ScaleLinear<number, number>;
  y: ScaleLinear<number, number>;
}

export function makeFrame(
  xDomain: [number, number],
  yDomain: [number, number],
  labels: { x: string; y: string; title?: string },
): PlotFrame {
  const doc = new SvgDoc(WIDTH, HEIGHT);
  const left = MARGIN.left;
  const right = WIDTH - MARGIN.right;
  const top = MARGIN.top;
  const bottom = HEIGHT - MARGIN.bottom;
  const x = scaleLinear().domain(xDomain).range([left, right]);
  const y = scaleLinear().domain(yDomain).range([bottom, top]);

  doc.rect(left, top, right - left, bottom - top, "none", {
    stroke: "#000000",
    "stroke-width": 1,
  });
  if (labels.title) {
    doc.text((left + right) / 2, top - 14, labels.title, {
      "text-anchor": "middle",
    });
  }
  doc.text((left + right) / 2, HEIGHT - 10, labels.x, {
    "text-anchor": "middle",
  });
  doc.text(14, (top + bottom) / 2, labels.y, {
    "text-anchor": "middle",
    transform: `rotate(-90 14 ${(top + bottom) / 2})`,
  });
  // endpoint ticks
  doc.text(left, bottom + FONT_SIZE + 4, fmt(xDomain[0]), {
    "text-anchor": "start",
  });
  doc.text(right, bottom + FONT_SIZE + 4, fmt(xDomain[1]), {
    "text-anchor": "end",
  });
  doc.text(left - 4, bottom, fmt(yDomain[0]), { "text-anchor": "end" });
  doc.text(left - 4, top + FONT_SIZE / 2, fmt(yDomain[1]), {
    "text-anchor": "end",
  });
  return { doc, x, y };
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo === hi) {
    // degenerate: widen so the scale stays invertible
    lo -= 1;
    hi += 1;
  }
  return [lo, hi];
}

export function polylinePath(
  xs: number[],
  ys: number[],
  frame: PlotFrame,
): string {
  const parts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    const cmd = i === 0 ? "M" : "L";
    parts.push(`${cmd}${frame.x(xs[i]).toFixed(2)},${frame.y(ys[i]).toFixed(2)}`);
  }
  return parts.join("");
}
