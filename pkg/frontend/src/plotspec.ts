/**
 * Plot specification: which panels to render from which files.
 *
 * {
 *   "panels": [
 *     {"kind": "decay",  "csv": "linear_decay.csv", "summary": "linear_decay_summary.json", "out": "decay.svg"},
 *     {"kind": "energy", "csv": "simulate.csv", "out": "energy.svg"},
 *     {"kind": "picard", "csv": "picard.csv", "out": "picard.svg"}
 *   ],
 *   "timestamps": false
 * }
 */

import { readFile, writeFile, mkdir } from "fs/promises";
import path from "path";

import {
  LINEAR_DECAY_COLUMNS,
  PICARD_COLUMNS,
  SIMULATE_COLUMNS,
  SchemaError,
  parseCsv,
  parseDecaySummary,
} from "./schema.js";
import { renderDecayPanel, renderEnergyPanel, renderPicardPanel } from "./panels.js";

export type PanelKind = "decay" | "energy" | "picard";

export interface PanelSpec {
  kind: PanelKind;
  csv: string;
  summary?: string;
  out: string;
}

export interface PlotSpec {
  panels: PanelSpec[];
  timestamps?: boolean;
}

export function parsePlotSpec(text: string): PlotSpec {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch (err) {
    throw new SchemaError(`plot spec is not valid JSON: ${(err as Error).message}`);
  }
  const obj = data as Record<string, unknown>;
  if (!Array.isArray(obj.panels) || obj.panels.length === 0) {
    throw new SchemaError("plot spec needs a non-empty panels array");
  }
  const panels: PanelSpec[] = [];
  for (const raw of obj.panels) {
    const p = raw as Record<string, unknown>;
    const kind = p.kind as PanelKind;
    if (!["decay", "energy", "picard"].includes(kind)) {
      throw new SchemaError(`unknown panel kind ${JSON.stringify(p.kind)}`);
    }
    if (typeof p.csv !== "string" || typeof p.out !== "string") {
      throw new SchemaError("each panel needs csv and out paths");
    }
    if (kind === "decay" && typeof p.summary !== "string") {
      throw new SchemaError("decay panels need a summary path");
    }
    panels.push({ kind, csv: p.csv, summary: p.summary as string | undefined, out: p.out });
  }
  return { panels, timestamps: Boolean(obj.timestamps) };
}

export async function renderPanel(panel: PanelSpec, baseDir = "."): Promise<string> {
  const csvText = await readFile(path.resolve(baseDir, panel.csv), "utf8");
  switch (panel.kind) {
    case "decay": {
      const rows = parseCsv(csvText, LINEAR_DECAY_COLUMNS);
      const summaryText = await readFile(path.resolve(baseDir, panel.summary!), "utf8");
      return renderDecayPanel(rows, parseDecaySummary(summaryText));
    }
    case "energy":
      return renderEnergyPanel(parseCsv(csvText, SIMULATE_COLUMNS));
    case "picard":
      return renderPicardPanel(parseCsv(csvText, PICARD_COLUMNS));
  }
}

export async function runPlotSpec(spec: PlotSpec, baseDir = "."): Promise<string[]> {
  const written: string[] = [];
  for (const panel of spec.panels) {
    let svg = await renderPanel(panel, baseDir);
    if (spec.timestamps) {
      svg = svg.replace(
        "</svg>",
        `<metadata data-generated-at="${new Date().toISOString()}"/>\n</svg>`,
      );
    }
    const outPath = path.resolve(baseDir, panel.out);
    await mkdir(path.dirname(outPath), { recursive: true });
    await writeFile(outPath, svg, "utf8");
    written.push(outPath);
  }
  return written;
}
