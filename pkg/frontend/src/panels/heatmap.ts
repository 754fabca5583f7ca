/**
 * Correlation-matrix heatmap: symmetric diverging colormap centered at 0,
 * diagonal masked, optional dashed ridge-prediction overlays and horizon
 * marker. Ridge and horizon angles map to ion indices through the theta
 * table of the same run (a coordinate lookup, not a computation on the
 * correlation data).
 */

import { interpolateRdBu } from "d3-scale-chromatic";
import { ColumnTable, DataFileError, MatrixTable, column } from "../csv.js";
import { SvgDoc, fmt } from "../svg.js";
import { PanelOptions, RenderResult } from "./common.js";

const SIZE = 480;
const MARGIN = { left: 70, top: 40 };
const TWO_PI = 2 * Math.PI;

export interface HeatmapAnnotations {
  horizon?: boolean;
  ridges?: boolean;
}

/** Index of the ion whose angle is circularly closest to `theta`. */
function thetaToIndex(thetas: number[], theta: number): number {
  const target = ((theta % TWO_PI) + TWO_PI) % TWO_PI;
  let best = 0;
  let bestDist = Infinity;
  for (let i = 0; i < thetas.length; i++) {
    const d = Math.abs(((thetas[i] - target + Math.PI) % TWO_PI) - Math.PI);
    if (d < bestDist) {
      bestDist = d;
      best = i;
    }
  }
  return best;
}

export function renderHeatmap(
  matrix: MatrixTable,
  theta: ColumnTable,
  ridges: ColumnTable | null,
  annotations: HeatmapAnnotations = {},
  opts: PanelOptions = {},
): RenderResult {
  const c = matrix.values;
  const n = c.length;
  if (c.some((row) => row.length !== n)) {
    throw new DataFileError(`${matrix.path}: correlation matrix must be square`);
  }
  const thetas = column(theta, "theta");
  if (thetas.length !== n) {
    throw new DataFileError(
      `${theta.path}: ${thetas.length} angles for a ${n}x${n} matrix`,
    );
  }

  let vmax = 0;
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      if (i !== j) vmax = Math.max(vmax, Math.abs(c[i][j]));
    }
  }
  if (vmax === 0) vmax = 1;

  const doc = new SvgDoc(SIZE + MARGIN.left + 40, SIZE + MARGIN.top + 50);
  if (opts.title) {
    doc.text(MARGIN.left + SIZE / 2, MARGIN.top - 14, opts.title, {
      "text-anchor": "middle",
    });
  }
  const cell = SIZE / n;
  const plotted: number[] = [];
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      if (i === j) continue; // masked diagonal
      const v = c[i][j];
      // 0 -> white center; +/- vmax -> the two ends of the diverging map
      const fill = interpolateRdBu(0.5 - v / (2 * vmax));
      doc.rect(MARGIN.left + j * cell, MARGIN.top + i * cell, cell, cell, fill);
      plotted.push(v);
    }
  }
  doc.rect(MARGIN.left, MARGIN.top, SIZE, SIZE, "none", {
    stroke: "#000000",
    "stroke-width": 1,
  });
  doc.text(MARGIN.left + SIZE / 2, SIZE + MARGIN.top + 30, "ion index j", {
    "text-anchor": "middle",
  });
  doc.text(20, MARGIN.top + SIZE / 2, "ion index i", {
    "text-anchor": "middle",
    transform: `rotate(-90 20 ${MARGIN.top + SIZE / 2})`,
  });

  const toX = (j: number) => MARGIN.left + (j + 0.5) * cell;
  const toY = (i: number) => MARGIN.top + (i + 0.5) * cell;

  if (annotations.ridges !== false && ridges !== null) {
    const lineIds = column(ridges, "line");
    const thetaA = column(ridges, "theta_a");
    const thetaB = column(ridges, "theta_b");
    for (const id of [...new Set(lineIds)]) {
      const pts: string[] = [];
      for (let r = 0; r < lineIds.length; r++) {
        if (lineIds[r] !== id) continue;
        const i = thetaToIndex(thetas, thetaA[r]);
        const j = thetaToIndex(thetas, thetaB[r]);
        pts.push(`${pts.length === 0 ? "M" : "L"}${toX(j).toFixed(2)},${toY(i).toFixed(2)}`);
      }
      doc.path(pts.join(""), "#000000", {
        "stroke-width": 1.2,
        "stroke-dasharray": "5,4",
        class: "ridge",
      });
    }
  }

  if (annotations.horizon && matrix.meta["horizon_theta"] !== undefined
      && matrix.meta["horizon_theta"] !== "None") {
    const thetaH = Number(matrix.meta["horizon_theta"]);
    const idx = thetaToIndex(thetas, thetaH);
    doc.line(toX(idx), MARGIN.top, toX(idx), MARGIN.top + SIZE, "#444444", {
      "stroke-width": 1,
      "stroke-dasharray": "2,3",
      class: "horizon",
    });
    doc.line(MARGIN.left, toY(idx), MARGIN.left + SIZE, toY(idx), "#444444", {
      "stroke-width": 1,
      "stroke-dasharray": "2,3",
      class: "horizon",
    });
  }

  // color bar endpoints: the extreme plotted value defines the scale
  doc.text(MARGIN.left + SIZE + 8, MARGIN.top + 10, `|C| <= ${fmt(vmax)}`, {
    "text-anchor": "start",
  });

  return { svg: doc.toString(), plotted };
}
