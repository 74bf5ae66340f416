/**
 * Tiny hand-rolled SVG scene builder: axes, polylines, bars, text.
 * No rendering dependencies; output is deterministic for identical input
 * (no timestamps unless explicitly requested by the spec).
 */

export interface Margins {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export const DEFAULT_MARGINS: Margins = { top: 40, right: 30, bottom: 50, left: 70 };

export type Scale = (value: number) => number;

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  return (v) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function logScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const l0 = Math.log10(d0);
  const l1 = Math.log10(d1);
  const span = l1 - l0 || 1;
  return (v) => r0 + ((Math.log10(v) - l0) / span) * (r1 - r0);
}

export function logTicks(d0: number, d1: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(d0) - 1e-9); e <= Math.floor(Math.log10(d1) + 1e-9); e++) {
    ticks.push(10 ** e);
  }
  return ticks;
}

const fmt = (x: number) => (Number.isInteger(x) ? String(x) : x.toPrecision(6));

export class SvgScene {
  private parts: string[] = [];
  constructor(
    readonly width: number,
    readonly height: number,
    readonly rootAttrs: Record<string, string> = {},
  ) {}

  add(fragment: string): void {
    this.parts.push(fragment);
  }

  line(x1: number, y1: number, x2: number, y2: number, style: string, attrs = ""): void {
    this.add(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" style="${style}" ${attrs}/>`,
    );
  }

  polyline(points: Array<[number, number]>, style: string, attrs = ""): void {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.add(`<polyline fill="none" points="${pts}" style="${style}" ${attrs}/>`);
  }

  rect(x: number, y: number, w: number, h: number, style: string, attrs = ""): void {
    this.add(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" style="${style}" ${attrs}/>`,
    );
  }

  text(x: number, y: number, content: string, style = "font-size:12px", attrs = ""): void {
    this.add(`<text x="${fmt(x)}" y="${fmt(y)}" style="${style}" ${attrs}>${content}</text>`);
  }

  render(): string {
    const attrs = Object.entries(this.rootAttrs)
      .map(([k, v]) => `${k}="${v}"`)
      .join(" ");
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}" ${attrs}>`,
      `<rect x="0" y="0" width="${this.width}" height="${this.height}" fill="white"/>`,
      ...this.parts,
      "</svg>",
    ].join("\n");
  }
}

export function drawLogLogFrame(
  scene: SvgScene,
  margins: Margins,
  xDomain: [number, number],
  yDomain: [number, number],
  xLabel: string,
  yLabel: string,
): { sx: Scale; sy: Scale } {
  const x0 = margins.left;
  const x1 = scene.width - margins.right;
  const y0 = scene.height - margins.bottom;
  const y1 = margins.top;
  const sx = logScale(xDomain[0], xDomain[1], x0, x1);
  const sy = logScale(yDomain[0], yDomain[1], y0, y1);
  scene.line(x0, y0, x1, y0, "stroke:#333;stroke-width:1");
  scene.line(x0, y0, x0, y1, "stroke:#333;stroke-width:1");
  for (const t of logTicks(...xDomain)) {
    const px = sx(t);
    scene.line(px, y0, px, y0 + 5, "stroke:#333;stroke-width:1");
    scene.text(px - 10, y0 + 20, `1e${Math.round(Math.log10(t))}`);
  }
  for (const t of logTicks(...yDomain)) {
    const py = sy(t);
    scene.line(x0 - 5, py, x0, py, "stroke:#333;stroke-width:1");
    scene.text(x0 - 48, py + 4, `1e${Math.round(Math.log10(t))}`);
  }
  scene.text((x0 + x1) / 2 - 10, scene.height - 12, xLabel);
  scene.text(12, (y0 + y1) / 2, yLabel, "font-size:12px", 'transform="rotate(-90 12 300)"');
  return { sx, sy };
}
