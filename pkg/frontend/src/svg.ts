/**
 * Minimal deterministic SVG document builder.
 *
 * No DOM, no dates, no randomness: identical inputs yield byte-identical
 * markup. Fonts and sizes are fixed so output does not depend on the host.
 */

export const FONT = "Courier, monospace";
export const FONT_SIZE = 11;

/** Fixed-precision coordinate formatting (avoids long float tails). */
export function px(v: number): string {
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

/** Data-value label formatting. */
export function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(3);
  return String(parseFloat(v.toPrecision(5)));
}

function attrs(a: Record<string, string | number>): string {
  return Object.entries(a)
    .map(([k, v]) => ` ${k}="${v}"`)
    .join("");
}

export class SvgDoc {
  private parts: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {}

  rect(x: number, y: number, w: number, h: number, fill: string,
       extra: Record<string, string | number> = {}): void {
    this.parts.push(
      `<rect x="${px(x)}" y="${px(y)}" width="${px(w)}" height="${px(h)}"` +
        ` fill="${fill}"${attrs(extra)}/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string,
       extra: Record<string, string | number> = {}): void {
    this.parts.push(
      `<line x1="${px(x1)}" y1="${px(y1)}" x2="${px(x2)}" y2="${px(y2)}"` +
        ` stroke="${stroke}"${attrs(extra)}/>`,
    );
  }

  path(d: string, stroke: string,
       extra: Record<string, string | number> = {}): void {
    this.parts.push(`<path d="${d}" fill="none" stroke="${stroke}"${attrs(extra)}/>`);
  }

  circle(cx: number, cy: number, r: number, fill: string,
         extra: Record<string, string | number> = {}): void {
    this.parts.push(
      `<circle cx="${px(cx)}" cy="${px(cy)}" r="${px(r)}" fill="${fill}"${attrs(extra)}/>`,
    );
  }

  text(x: number, y: number, content: string,
       extra: Record<string, string | number> = {}): void {
    const esc = content
      .replace(/&/g, "&amp;")
      .replace(/</g, "&lt;")
      .replace(/>/g, "&gt;");
    this.parts.push(
      `<text x="${px(x)}" y="${px(y)}" font-family="${FONT}"` +
        ` font-size="${FONT_SIZE}"${attrs(extra)}>${esc}</text>`,
    );
  }

  raw(markup: string): void {
    this.parts.push(markup);
  }

  toString(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}"` +
      ` height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}
