/**
 * No-derived-numbers lint.
 *
 * Panels report every data-space value they drew a mark for. This check
 * verifies each one exists verbatim in an input file, so the renderer can
 * only display simulation output, never analyze it. Sign flips (|x| display
 * of negative-norm series) are the one permitted display transform.
 */

import { ColumnTable, MatrixTable } from "./csv.js";

export class LintError extends Error {}

export type InputFile = ColumnTable | MatrixTable | Record<string, unknown>;

function collectNumbers(input: InputFile, into: Set<number>): void {
  if ("rows" in input && Array.isArray((input as ColumnTable).rows)) {
    for (const row of (input as ColumnTable).rows) {
      for (const v of row) into.add(v);
    }
  } else if ("values" in input && Array.isArray((input as MatrixTable).values)) {
    for (const row of (input as MatrixTable).values) {
      for (const v of row) into.add(v);
    }
  } else {
    collectFromJson(input, into);
  }
  const meta = (input as ColumnTable).meta;
  if (meta) {
    for (const v of Object.values(meta)) {
      const num = Number(v);
      if (!Number.isNaN(num)) into.add(num);
    }
  }
}

function collectFromJson(node: unknown, into: Set<number>): void {
  if (typeof node === "number") into.add(node);
  else if (Array.isArray(node)) node.forEach((v) => collectFromJson(v, into));
  else if (node !== null && typeof node === "object") {
    Object.values(node).forEach((v) => collectFromJson(v, into));
  }
}

export function lintPlotted(plotted: number[], inputs: InputFile[]): void {
  const known = new Set<number>();
  for (const input of inputs) collectNumbers(input, known);
  for (const v of plotted) {
    if (!known.has(v) && !known.has(-v)) {
      throw new LintError(
        `plotted value ${v} does not occur in any input file`,
      );
    }
  }
}
