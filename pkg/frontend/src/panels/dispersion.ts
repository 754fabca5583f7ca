/**
 * Dispersion panel: mode frequency and group velocity over the wave number,
 * with the group velocity on a secondary axis.
 */

import { scaleLinear } from "d3-scale";
import { ColumnTable, column } from "../csv.js";
import { FONT_SIZE, fmt } from "../svg.js";
import {
  HEIGHT,
  MARGIN,
  PanelOptions,
  RenderResult,
  WIDTH,
  extent,
  makeFrame,
  polylinePath,
} from "./common.js";

export function renderDispersion(
  table: ColumnTable,
  opts: PanelOptions = {},
): RenderResult {
  const k = column(table, "k");
  const omega = column(table, "omega");
  const vgroup = column(table, "vgroup");
  const order = k.map((_, i) => i).sort((a, b) => k[a] - k[b]);
  const ks = order.map((i) => k[i]);

  const frame = makeFrame(opts.xRange ?? extent(k), opts.yRange ?? extent(omega), {
    x: "wave number k",
    y: "omega",
    title: opts.title,
  });
  frame.doc.path(
    polylinePath(ks, order.map((i) => omega[i]), frame),
    "#000000",
    { "stroke-width": 1.2, class: "series" },
  );

  // secondary axis for the group velocity
  const vDomain = extent(vgroup);
  const yRight = scaleLinear()
    .domain(vDomain)
    .range([HEIGHT - MARGIN.bottom, MARGIN.top]);
  const vFrame = { ...frame, y: yRight };
  frame.doc.path(
    polylinePath(ks, order.map((i) => vgroup[i]), vFrame),
    "#1f6fb4",
    { "stroke-width": 1.2, "stroke-dasharray": "6,3", class: "series" },
  );
  const right = WIDTH - MARGIN.right;
  frame.doc.text(right + 4, HEIGHT - MARGIN.bottom, fmt(vDomain[0]), {
    "text-anchor": "start",
  });
  frame.doc.text(right + 4, MARGIN.top + FONT_SIZE / 2, fmt(vDomain[1]), {
    "text-anchor": "start",
  });
  frame.doc.text(WIDTH - 14, HEIGHT / 2, "v_group", {
    "text-anchor": "middle",
    transform: `rotate(90 ${WIDTH - 14} ${HEIGHT / 2})`,
  });

  const ly = 52;
  frame.doc.line(440, ly - 4, 470, ly - 4, "#000000", { "stroke-width": 1.2 });
  frame.doc.text(475, ly, "omega");
  frame.doc.line(440, ly + FONT_SIZE, 470, ly + FONT_SIZE, "#1f6fb4", {
    "stroke-width": 1.2,
    "stroke-dasharray": "6,3",
  });
  frame.doc.text(475, ly + FONT_SIZE + 4, "v_group");

  return { svg: frame.doc.toString(), plotted: [...k, ...omega, ...vgroup] };
}
