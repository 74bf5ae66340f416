/**
 * CSV / JSON schemas published by the solver CLI, and strict readers for
 * them.  Files whose headers deviate from the published column lists are
 * rejected outright: the plotter never recomputes or repairs data.
 */

export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

export const SIMULATE_COLUMNS = [
  "t",
  "l2_u",
  "h1_u",
  "l2_phi_low",
  "l2_m_low",
  "e_high",
  "d_high",
  "f_norm",
  "znorm_partial",
] as const;

export const LINEAR_DECAY_COLUMNS = ["t", "norm_k0", "norm_k1"] as const;

export const PICARD_COLUMNS = ["k", "d_k", "ratio"] as const;

export type CsvRow = Record<string, number>;

export function parseCsv(text: string, expected: readonly string[]): CsvRow[] {
  const lines = text
    .split(/\r?\n/)
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty CSV: no header row");
  }
  const header = lines[0].split(",");
  if (header.length !== expected.length || header.some((h, i) => h !== expected[i])) {
    throw new SchemaError(
      `CSV header [${header.join(",")}] deviates from the published schema [${expected.join(",")}]`,
    );
  }
  if (lines.length === 1) {
    throw new SchemaError("empty CSV: header but no data rows");
  }
  const rows: CsvRow[] = [];
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    if (cells.length !== expected.length) {
      throw new SchemaError(`row has ${cells.length} cells, expected ${expected.length}`);
    }
    const row: CsvRow = {};
    cells.forEach((cell, i) => {
      const value = Number(cell);
      if (!Number.isFinite(value)) {
        throw new SchemaError(`non-numeric cell ${JSON.stringify(cell)} in column ${expected[i]}`);
      }
      row[expected[i]] = value;
    });
    rows.push(row);
  }
  return rows;
}

export interface DecaySummary {
  exponent_k0: number;
  exponent_k1: number;
  target_k0: number;
  target_k1: number;
  pass: boolean;
  window: [number, number];
}

const DECAY_SUMMARY_KEYS = [
  "exponent_k0",
  "exponent_k1",
  "target_k0",
  "target_k1",
  "pass",
  "window",
] as const;

export function parseDecaySummary(text: string): DecaySummary {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch (err) {
    throw new SchemaError(`summary is not valid JSON: ${(err as Error).message}`);
  }
  const obj = data as Record<string, unknown>;
  for (const key of DECAY_SUMMARY_KEYS) {
    if (!(key in obj)) {
      throw new SchemaError(`summary missing required key ${JSON.stringify(key)}`);
    }
  }
  const windowRaw = obj.window as unknown[];
  if (!Array.isArray(windowRaw) || windowRaw.length !== 2) {
    throw new SchemaError("summary window must be a [t_a, t_b] pair");
  }
  return {
    exponent_k0: Number(obj.exponent_k0),
    exponent_k1: Number(obj.exponent_k1),
    target_k0: Number(obj.target_k0),
    target_k1: Number(obj.target_k1),
    pass: Boolean(obj.pass),
    window: [Number(windowRaw[0]), Number(windowRaw[1])],
  };
}
