/**
 * Klein-Gordon norm spectrum panel: the final pulse and the two incoming
 * series (positive- and negative-frequency) of the backward-propagation run
 * as three distinguishable curves over the mode number.
 */

import { ColumnTable, DataFileError, column } from "../csv.js";
import { FONT_SIZE } from "../svg.js";
import {
  PanelOptions,
  RenderResult,
  extent,
  makeFrame,
  polylinePath,
} from "./common.js";

const SERIES_STYLE = [
  { label: "final", stroke: "#000000", dash: "" },
  { label: "initial +freq", stroke: "#1f6fb4", dash: "" },
  { label: "initial -freq", stroke: "#c23b22", dash: "6,3" },
];

export function renderSpectrum(
  tables: ColumnTable[],
  opts: PanelOptions = {},
): RenderResult {
  const final = tables.find((t) => t.meta["t_tag"] === "final");
  const initial = tables.find((t) => t.meta["t_tag"] === "initial");
  if (!final || !initial) {
    throw new DataFileError(
      "spectrum panel needs one t_tag=final and one t_tag=initial input",
    );
  }
  const n = column(final, "n");
  const series = [
    { x: n, y: column(final, "norm_plus") },
    { x: column(initial, "n"), y: column(initial, "norm_plus") },
    // negative-frequency norms are stored negative; display their magnitude
    { x: column(initial, "n"), y: column(initial, "norm_minus").map((v) => -v) },
  ];

  const xDomain = opts.xRange ?? extent(n);
  const yDomain = opts.yRange ?? extent(series.flatMap((s) => s.y));
  const frame = makeFrame(xDomain, yDomain, {
    x: "mode number n",
    y: "KG norm",
    title: opts.title,
  });

  const plotted: number[] = [];
  series.forEach((s, i) => {
    const style = SERIES_STYLE[i];
    const order = s.x.map((_, j) => j).sort((a, b) => s.x[a] - s.x[b]);
    const xs = order.map((j) => s.x[j]);
    const ys = order.map((j) => s.y[j]);
    frame.doc.path(polylinePath(xs, ys, frame), style.stroke, {
      "stroke-width": 1.2,
      ...(style.dash ? { "stroke-dasharray": style.dash } : {}),
      class: "series",
    });
    plotted.push(...s.x, ...s.y);
    // legend
    const ly = 52 + i * (FONT_SIZE + 4);
    frame.doc.line(480, ly - 4, 510, ly - 4, style.stroke, {
      "stroke-width": 1.2,
      ...(style.dash ? { "stroke-dasharray": style.dash } : {}),
    });
    frame.doc.text(515, ly, style.label);
  });

  return { svg: frame.doc.toString(), plotted };
}
