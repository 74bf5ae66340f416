import assert from "node:assert/strict";
import { test } from "node:test";

import {
  LINEAR_DECAY_COLUMNS,
  PICARD_COLUMNS,
  SchemaError,
  parseCsv,
  parseDecaySummary,
} from "../src/schema.js";

test("valid linear-decay CSV parses", () => {
  const text = "t,norm_k0,norm_k1\n10.0,0.5,0.1\n100.0,0.05,0.001\n";
  const rows = parseCsv(text, LINEAR_DECAY_COLUMNS);
  assert.equal(rows.length, 2);
  assert.equal(rows[0].t, 10.0);
  assert.equal(rows[1].norm_k1, 0.001);
});

test("header deviation rejected", () => {
  const text = "t,norm_k0,norm_kX\n10.0,0.5,0.1\n";
  assert.throws(() => parseCsv(text, LINEAR_DECAY_COLUMNS), SchemaError);
});

test("extra column rejected", () => {
  const text = "t,norm_k0,norm_k1,extra\n10.0,0.5,0.1,1\n";
  assert.throws(() => parseCsv(text, LINEAR_DECAY_COLUMNS), SchemaError);
});

test("reordered columns rejected", () => {
  const text = "norm_k0,t,norm_k1\n0.5,10.0,0.1\n";
  assert.throws(() => parseCsv(text, LINEAR_DECAY_COLUMNS), SchemaError);
});

test("empty CSV rejected", () => {
  assert.throws(() => parseCsv("", LINEAR_DECAY_COLUMNS), SchemaError);
  assert.throws(() => parseCsv("t,norm_k0,norm_k1\n", LINEAR_DECAY_COLUMNS), SchemaError);
});

test("non-numeric cell rejected", () => {
  const text = "k,d_k,ratio\n1,oops,0.0\n";
  assert.throws(() => parseCsv(text, PICARD_COLUMNS), SchemaError);
});

test("summary with missing keys rejected", () => {
  assert.throws(() => parseDecaySummary('{"exponent_k0": -0.75}'), SchemaError);
  assert.throws(() => parseDecaySummary("not json"), SchemaError);
});

test("summary parses", () => {
  const summary = parseDecaySummary(
    JSON.stringify({
      exponent_k0: -0.751,
      exponent_k1: -1.249,
      target_k0: -0.75,
      target_k1: -1.25,
      pass: true,
      window: [100, 10000],
      constants: { kappa1: 20 },
    }),
  );
  assert.equal(summary.target_k1, -1.25);
  assert.deepEqual(summary.window, [100, 10000]);
});
