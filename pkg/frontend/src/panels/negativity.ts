/**
 * Logarithmic-negativity traces: E_N over time, one series per input file
 * (each file is one initial temperature).
 */

import { ColumnTable, column } from "../csv.js";
import { FONT_SIZE, fmt } from "../svg.js";
import {
  PanelOptions,
  RenderResult,
  extent,
  makeFrame,
  polylinePath,
} from "./common.js";

const COLORS = ["#000000", "#1f6fb4", "#c23b22", "#3b8c3b", "#8c5e3b"];

export function renderNegativityTrace(
  tables: ColumnTable[],
  opts: PanelOptions = {},
): RenderResult {
  const series = tables.map((t) => ({
    t: column(t, "t"),
    en: column(t, "E_N"),
    temp: column(t, "T_init")[0] ?? 0,
  }));

  const xDomain = opts.xRange ?? extent(series.flatMap((s) => s.t));
  const yDomain = opts.yRange ?? extent(series.flatMap((s) => s.en));
  const frame = makeFrame(xDomain, yDomain, {
    x: "t / T",
    y: "E_N",
    title: opts.title,
  });

  const plotted: number[] = [];
  series.forEach((s, i) => {
    const color = COLORS[i % COLORS.length];
    const order = s.t.map((_, j) => j).sort((a, b) => s.t[a] - s.t[b]);
    const ts = order.map((j) => s.t[j]);
    const ens = order.map((j) => s.en[j]);
    frame.doc.path(polylinePath(ts, ens, frame), color, {
      "stroke-width": 1.2,
      class: "series",
    });
    for (let j = 0; j < ts.length; j++) {
      frame.doc.circle(frame.x(ts[j]), frame.y(ens[j]), 2.5, color);
    }
    plotted.push(...s.t, ...s.en, s.temp);
    const ly = 52 + i * (FONT_SIZE + 4);
    frame.doc.line(440, ly - 4, 470, ly - 4, color, { "stroke-width": 1.2 });
    frame.doc.text(475, ly, `T_init = ${fmt(s.temp)}`);
  });

  return { svg: frame.doc.toString(), plotted };
}
