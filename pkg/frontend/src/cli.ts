#!/usr/bin/env node
/**
 * nsk-plot --spec <spec.json>
 *
 * Renders the panels described by the spec from solver CSV/JSON outputs.
 * Exit codes: 0 success, 2 bad spec/schema, 1 I/O or render failure.
 */

import { readFile } from "fs/promises";
import path from "path";

import { SchemaError } from "./schema.js";
import { parsePlotSpec, runPlotSpec } from "./plotspec.js";

export async function main(argv: string[]): Promise<number> {
  const idx = argv.indexOf("--spec");
  if (idx === -1 || idx + 1 >= argv.length) {
    console.error("usage: nsk-plot --spec <spec.json>");
    return 2;
  }
  const specPath = argv[idx + 1];
  try {
    const spec = parsePlotSpec(await readFile(specPath, "utf8"));
    const written = await runPlotSpec(spec, path.dirname(path.resolve(specPath)));
    for (const file of written) {
      console.log(file);
    }
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const isDirect = process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${path.resolve(process.argv[1])}`).href;
if (isDirect) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
