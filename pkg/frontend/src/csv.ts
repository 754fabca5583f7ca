/**
 * Readers for the simulator's CSV outputs.
 *
 * Column files carry a `#`-comment header with `config_hash`, the emitted
 * configuration and free-form `key = value` metadata, then a column-name row
 * and numeric rows. Matrix files carry the same comment header followed by
 * bare numeric rows (`shape = NxM` in the metadata).
 */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export interface ColumnTable {
  path: string;
  configHash: string;
  meta: Record<string, string>;
  columns: string[];
  rows: number[][];
}

export interface MatrixTable {
  path: string;
  configHash: string;
  meta: Record<string, string>;
  values: number[][];
}

export class DataFileError extends Error {}

function splitHeader(path: string, text: string): {
  configHash: string;
  meta: Record<string, string>;
  body: string[];
} {
  const meta: Record<string, string> = {};
  let configHash = "";
  const body: string[] = [];
  for (const line of text.split(/\r?\n/)) {
    if (line.startsWith("#")) {
      const m = line.match(/^#\s*([\w.]+)\s*=\s*(.*)$/);
      if (m) {
        if (m[1] === "config_hash") configHash = m[2].trim();
        else meta[m[1]] = m[2].trim();
      }
    } else if (line.trim() !== "") {
      body.push(line);
    }
  }
  if (!configHash) {
    throw new DataFileError(`${path}: missing config_hash header`);
  }
  return { configHash, meta, body };
}

function parseNumericRows(path: string, lines: string[]): number[][] {
  const parsed = Papa.parse<number[]>(lines.join("\n"), {
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new DataFileError(`${path}: ${parsed.errors[0].message}`);
  }
  return parsed.data.map((row, i) => {
    if (row.some((v) => typeof v !== "number" || Number.isNaN(v))) {
      throw new DataFileError(`${path}: non-numeric value in data row ${i}`);
    }
    return row as number[];
  });
}

export function readColumnTable(path: string): ColumnTable {
  const { configHash, meta, body } = splitHeader(path, readFileSync(path, "utf-8"));
  if (body.length === 0) {
    throw new DataFileError(`${path}: no column header row`);
  }
  const columns = body[0].split(",").map((c) => c.trim());
  const rows = parseNumericRows(path, body.slice(1));
  for (const row of rows) {
    if (row.length !== columns.length) {
      throw new DataFileError(
        `${path}: row width ${row.length} != ${columns.length} columns`,
      );
    }
  }
  return { path, configHash, meta, columns, rows };
}

export function readMatrixTable(path: string): MatrixTable {
  const { configHash, meta, body } = splitHeader(path, readFileSync(path, "utf-8"));
  const values = parseNumericRows(path, body);
  const shape = meta["shape"];
  if (shape) {
    const [r, c] = shape.split("x").map(Number);
    if (values.length !== r || values.some((row) => row.length !== c)) {
      throw new DataFileError(`${path}: data does not match shape ${shape}`);
    }
  }
  return { path, configHash, meta, values };
}

/** Column accessor; throws if the column is absent. */
export function column(table: ColumnTable, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new DataFileError(
      `${table.path}: no column '${name}' (have ${table.columns.join(", ")})`,
    );
  }
  return table.rows.map((row) => row[idx]);
}
