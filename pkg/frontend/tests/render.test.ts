import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { HashMismatchError, loadFigureSpec } from "../src/figspec.js";
import { renderFigure } from "../src/render.js";

const FIX = join(__dirname, "fixtures");

function specFile(payload: unknown): string {
  const dir = mkdtempSync(join(tmpdir(), "render-"));
  const path = join(dir, "spec.json");
  writeFileSync(path, JSON.stringify(payload));
  return path;
}

describe("renderFigure", () => {
  it("renders the three-series spectrum from a run's outputs", () => {
    const spec = loadFigureSpec(
      specFile({
        panel: "spectrum",
        title: "thermality spectra",
        inputs: [
          join(FIX, "thermality_run", "spectrum_final_s5.csv"),
          join(FIX, "thermality_run", "spectrum_initial_s5.csv"),
          join(FIX, "thermality_run", "thermality_s5.json"),
        ],
      }),
    );
    const svg = renderFigure(spec);
    expect(svg.startsWith("<svg")).toBe(true);
    expect((svg.match(/class="series"/g) ?? []).length).toBe(3);
  });

  it("renders a ridge-annotated heatmap", () => {
    const spec = loadFigureSpec(
      specFile({
        panel: "heatmap",
        annotations: { horizon: true, ridges: true },
        inputs: [
          join(FIX, "quench_run", "correlations_t0.3.csv"),
          join(FIX, "quench_run", "theta_t0.3.csv"),
          join(FIX, "quench_run", "ridges_t0.3.csv"),
        ],
      }),
    );
    const svg = renderFigure(spec);
    expect((svg.match(/class="ridge"/g) ?? []).length).toBe(2);
    expect((svg.match(/class="horizon"/g) ?? []).length).toBe(2);
  });

  it("refuses to mix files from different runs", () => {
    const spec = loadFigureSpec(
      specFile({
        panel: "heatmap",
        inputs: [
          join(FIX, "quench_run", "correlations_t0.3.csv"),
          join(FIX, "quench_run", "theta_t0.3.csv"),
          // different configuration, different hash
          join(FIX, "thermality_run", "spectrum_final_s5.csv"),
        ],
      }),
    );
    expect(() => renderFigure(spec)).toThrow(HashMismatchError);
  });

  it("produces byte-identical output for identical specs", () => {
    const payload = {
      panel: "negativity-trace" as const,
      inputs: [join(FIX, "negativity_run", "negativity.csv")],
    };
    const a = renderFigure(loadFigureSpec(specFile(payload)));
    const b = renderFigure(loadFigureSpec(specFile(payload)));
    expect(a).toBe(b);
  });
});
