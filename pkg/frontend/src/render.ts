/**
 * Figure assembly and command line:
 *
 *   ionring-render --spec fig.json --out fig.svg
 *
 * Loads the inputs named by the figure spec, refuses to mix runs, renders
 * the requested panel and runs the no-derived-numbers lint before writing.
 */

import { readFileSync, writeFileSync } from "node:fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import {
  ColumnTable,
  DataFileError,
  MatrixTable,
  readColumnTable,
  readMatrixTable,
} from "./csv.js";
import {
  FigureSpec,
  HashMismatchError,
  SpecError,
  checkHashes,
  loadFigureSpec,
} from "./figspec.js";
import { InputFile, LintError, lintPlotted } from "./lint.js";
import { RenderResult } from "./panels/common.js";
import { renderDispersion } from "./panels/dispersion.js";
import { renderHeatmap } from "./panels/heatmap.js";
import { renderNegativityTrace } from "./panels/negativity.js";
import { renderSpectrum } from "./panels/spectrum.js";

interface LoadedInputs {
  columns: ColumnTable[];
  matrices: MatrixTable[];
  jsons: Record<string, unknown>[];
  all: InputFile[];
}

function loadInputs(paths: string[]): LoadedInputs {
  const columns: ColumnTable[] = [];
  const matrices: MatrixTable[] = [];
  const jsons: Record<string, unknown>[] = [];
  const hashes = new Map<string, string>();
  for (const path of paths) {
    if (path.endsWith(".json")) {
      const payload = JSON.parse(readFileSync(path, "utf-8"));
      jsons.push(payload);
      if (typeof payload.config_hash === "string") {
        hashes.set(path, payload.config_hash);
      }
      continue;
    }
    const head = readFileSync(path, "utf-8").slice(0, 4096);
    if (/^#\s*shape\s*=/m.test(head)) {
      const m = readMatrixTable(path);
      matrices.push(m);
      hashes.set(path, m.configHash);
    } else {
      const t = readColumnTable(path);
      columns.push(t);
      hashes.set(path, t.configHash);
    }
  }
  checkHashes(hashes);
  return { columns, matrices, jsons, all: [...columns, ...matrices, ...jsons] };
}

function panelOptions(spec: FigureSpec) {
  return { title: spec.title, xRange: spec.axes?.x, yRange: spec.axes?.y };
}

export function renderFigure(spec: FigureSpec): string {
  const inputs = loadInputs(spec.inputs);
  let result: RenderResult;
  switch (spec.panel) {
    case "spectrum":
      result = renderSpectrum(inputs.columns, panelOptions(spec));
      break;
    case "dispersion": {
      if (inputs.columns.length !== 1) {
        throw new DataFileError("dispersion panel takes exactly one CSV input");
      }
      result = renderDispersion(inputs.columns[0], panelOptions(spec));
      break;
    }
    case "heatmap": {
      if (inputs.matrices.length !== 1) {
        throw new DataFileError(
          "heatmap panel needs exactly one correlation-matrix input",
        );
      }
      const theta = inputs.columns.find((t) => t.columns.includes("theta"));
      if (!theta) {
        throw new DataFileError("heatmap panel needs the run's theta table");
      }
      const ridges =
        inputs.columns.find((t) => t.columns.includes("theta_a")) ?? null;
      result = renderHeatmap(inputs.matrices[0], theta, ridges,
                             spec.annotations ?? {}, panelOptions(spec));
      break;
    }
    case "negativity-trace": {
      const traces = inputs.columns.filter((t) => t.columns.includes("E_N"));
      if (traces.length === 0) {
        throw new DataFileError("negativity-trace panel needs E_N inputs");
      }
      result = renderNegativityTrace(traces, panelOptions(spec));
      break;
    }
  }
  lintPlotted(result.plotted, inputs.all);
  return result.svg;
}

export function main(argv: string[]): number {
  const args = yargs(argv)
    .option("spec", { type: "string", demandOption: true,
                      describe: "figure spec JSON" })
    .option("out", { type: "string", demandOption: true,
                     describe: "output SVG path" })
    .strict()
    .exitProcess(false)
    .parseSync();
  try {
    const spec = loadFigureSpec(args.spec);
    writeFileSync(args.out, renderFigure(spec), "utf-8");
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    if (err instanceof SpecError || err instanceof DataFileError ||
        err instanceof HashMismatchError || err instanceof LintError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  process.exit(main(hideBin(process.argv)));
}
