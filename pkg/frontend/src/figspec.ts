/**
 * Figure specifications: a small JSON contract naming the panel type, the
 * input files and the annotation toggles. All inputs of one figure must come
 * from the same simulation run (matching config hashes).
 */

import { existsSync, readFileSync } from "node:fs";
import { dirname, resolve } from "node:path";
import { z } from "zod";

const axisRange = z.tuple([z.number(), z.number()]);

export const figureSpecSchema = z.object({
  panel: z.enum(["spectrum", "dispersion", "heatmap", "negativity-trace"]),
  inputs: z.array(z.string()).min(1),
  title: z.string().optional(),
  axes: z
    .object({ x: axisRange.optional(), y: axisRange.optional() })
    .optional(),
  annotations: z
    .object({
      horizon: z.boolean().optional(),
      ridges: z.boolean().optional(),
    })
    .optional(),
});

export type FigureSpec = z.infer<typeof figureSpecSchema>;

export class SpecError extends Error {}
export class HashMismatchError extends Error {}

/** Parse and validate a spec file; input paths resolve relative to it. */
export function loadFigureSpec(path: string): FigureSpec {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    throw new SpecError(`${path}: ${(err as Error).message}`);
  }
  const parsed = figureSpecSchema.safeParse(raw);
  if (!parsed.success) {
    throw new SpecError(`${path}: ${parsed.error.issues[0].message}`);
  }
  const base = dirname(resolve(path));
  const spec = {
    ...parsed.data,
    inputs: parsed.data.inputs.map((p) => resolve(base, p)),
  };
  for (const input of spec.inputs) {
    if (!existsSync(input)) {
      throw new SpecError(`${path}: input file not found: ${input}`);
    }
  }
  return spec;
}

/** Refuse to mix files from different runs. */
export function checkHashes(hashes: Map<string, string>): string {
  const distinct = new Set(hashes.values());
  if (distinct.size > 1) {
    const detail = [...hashes.entries()]
      .map(([p, h]) => `${p}: ${h}`)
      .join("; ");
    throw new HashMismatchError(`inputs come from different runs (${detail})`);
  }
  return distinct.values().next().value ?? "";
}
