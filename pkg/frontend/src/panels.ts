/**
 * Panel renderers.  Each consumes already-validated CSV rows (plus the JSON
 * summary for decay panels) and returns an SVG string; nothing numeric is
 * recomputed here beyond plotting transforms.
 */

import {
  CsvRow,
  DecaySummary,
  SchemaError,
} from "./schema.js";
import { DEFAULT_MARGINS, SvgScene, drawLogLogFrame, linearScale } from "./svg.js";

const WIDTH = 760;
const HEIGHT = 560;

function extent(values: number[]): [number, number] {
  return [Math.min(...values), Math.max(...values)];
}

function positive(values: number[], what: string): void {
  if (values.some((v) => !(v > 0))) {
    throw new SchemaError(`${what} must be positive for a log-log panel`);
  }
}

/**
 * Log-log decay figure: norm_k0 and norm_k1 series with reference slope
 * lines anchored at the first sample inside the summary's fit window.  The
 * reference slopes are embedded as metadata attributes so downstream checks
 * can compare the figure against the summary without re-parsing geometry.
 */
export function renderDecayPanel(rows: CsvRow[], summary: DecaySummary): string {
  const ts = rows.map((r) => r.t);
  positive(ts, "t");
  positive(rows.map((r) => r.norm_k0), "norm_k0");
  positive(rows.map((r) => r.norm_k1), "norm_k1");

  const scene = new SvgScene(WIDTH, HEIGHT, {
    "data-panel": "decay",
    "data-reference-slope-k0": String(summary.target_k0),
    "data-reference-slope-k1": String(summary.target_k1),
    "data-fitted-exponent-k0": String(summary.exponent_k0),
    "data-fitted-exponent-k1": String(summary.exponent_k1),
    "data-pass": String(summary.pass),
  });

  const yAll = rows.flatMap((r) => [r.norm_k0, r.norm_k1]);
  const { sx, sy } = drawLogLogFrame(
    scene,
    DEFAULT_MARGINS,
    extent(ts),
    extent(yAll),
    "t",
    "L2 norm",
  );

  const colors = { norm_k0: "#1f77b4", norm_k1: "#d62728" };
  for (const key of ["norm_k0", "norm_k1"] as const) {
    scene.polyline(
      rows.map((r) => [sx(r.t), sy(r[key])] as [number, number]),
      `stroke:${colors[key]};stroke-width:1.5`,
      `data-series="${key}"`,
    );
  }

  // Reference slopes anchored at the first sample inside the window.
  const [ta, tb] = summary.window;
  const anchor = rows.find((r) => r.t >= ta && r.t <= tb);
  if (anchor === undefined) {
    throw new SchemaError("no CSV sample falls inside the summary fit window");
  }
  const refs: Array<["norm_k0" | "norm_k1", number]> = [
    ["norm_k0", summary.target_k0],
    ["norm_k1", summary.target_k1],
  ];
  for (const [key, slope] of refs) {
    const pts: Array<[number, number]> = [];
    for (const r of rows) {
      if (r.t < anchor.t) continue;
      const y = anchor[key] * Math.pow((1 + r.t) / (1 + anchor.t), slope);
      pts.push([sx(r.t), sy(y)]);
    }
    scene.polyline(
      pts,
      "stroke:#666;stroke-width:1;stroke-dasharray:6 4",
      `data-reference-for="${key}" data-slope="${slope}"`,
    );
  }
  scene.text(
    DEFAULT_MARGINS.left + 8,
    24,
    `decay fit: k0 ${summary.exponent_k0.toFixed(4)} (target ${summary.target_k0}), ` +
      `k1 ${summary.exponent_k1.toFixed(4)} (target ${summary.target_k1}) ` +
      `[${summary.pass ? "PASS" : "FAIL"}]`,
  );
  return scene.render();
}

/** Semilog energy panel: high-frequency E and D against time. */
export function renderEnergyPanel(rows: CsvRow[]): string {
  const ts = rows.map((r) => r.t);
  const series = ["e_high", "d_high"] as const;
  const values = rows.flatMap((r) => series.map((k) => r[k])).filter((v) => v > 0);
  if (values.length === 0) {
    throw new SchemaError("energy panel needs at least one positive E/D sample");
  }
  const scene = new SvgScene(WIDTH, HEIGHT, { "data-panel": "energy" });
  const floor = Math.min(...values);
  const ceil = Math.max(...values);
  const margins = DEFAULT_MARGINS;
  const sx = linearScale(ts[0], ts[ts.length - 1] || 1, margins.left, WIDTH - margins.right);
  const syLog = (v: number) =>
    linearScale(Math.log10(floor), Math.log10(ceil), HEIGHT - margins.bottom, margins.top)(
      Math.log10(Math.max(v, floor)),
    );
  scene.line(margins.left, HEIGHT - margins.bottom, WIDTH - margins.right, HEIGHT - margins.bottom, "stroke:#333");
  scene.line(margins.left, HEIGHT - margins.bottom, margins.left, margins.top, "stroke:#333");
  const colors = { e_high: "#2ca02c", d_high: "#9467bd" };
  for (const key of series) {
    scene.polyline(
      rows.filter((r) => r[key] > 0).map((r) => [sx(r.t), syLog(r[key])] as [number, number]),
      `stroke:${colors[key]};stroke-width:1.5`,
      `data-series="${key}"`,
    );
  }
  scene.text(margins.left + 8, 24, "high-frequency energy E (green) and dissipation D (purple), log scale");
  scene.text((WIDTH) / 2 - 10, HEIGHT - 12, "t");
  return scene.render();
}

/** Bar chart of consecutive-iterate distances d_k with the 1/2-ratio guide. */
export function renderPicardPanel(rows: CsvRow[]): string {
  positive(rows.map((r) => r.d_k), "d_k");
  const scene = new SvgScene(WIDTH, HEIGHT, {
    "data-panel": "picard",
    "data-contraction-guide": "0.5",
  });
  const margins = DEFAULT_MARGINS;
  const ds = rows.map((r) => r.d_k);
  const lo = Math.min(...ds);
  const hi = Math.max(...ds);
  const syLog = (v: number) =>
    linearScale(Math.log10(lo), Math.log10(hi), HEIGHT - margins.bottom, margins.top)(Math.log10(v));
  const band = (WIDTH - margins.left - margins.right) / rows.length;
  scene.line(margins.left, HEIGHT - margins.bottom, WIDTH - margins.right, HEIGHT - margins.bottom, "stroke:#333");
  rows.forEach((r, i) => {
    const x = margins.left + i * band + band * 0.15;
    const y = syLog(r.d_k);
    scene.rect(
      x,
      y,
      band * 0.7,
      HEIGHT - margins.bottom - y,
      "fill:#1f77b4;fill-opacity:0.8",
      `data-k="${r.k}" data-d="${r.d_k}"`,
    );
    scene.text(x + band * 0.2, HEIGHT - margins.bottom + 18, `k=${r.k}`);
  });
  // guide: d_1 halved per iteration
  const guide: Array<[number, number]> = rows.map((r, i) => [
    margins.left + i * band + band * 0.5,
    syLog(ds[0] * Math.pow(0.5, i)),
  ]);
  scene.polyline(guide, "stroke:#d62728;stroke-width:1.5;stroke-dasharray:5 4", 'data-guide="half-ratio"');
  scene.text(margins.left + 8, 24, "Picard iterate distances d_k (bars) vs 1/2-ratio guide (dashed)");
  return scene.render();
}
