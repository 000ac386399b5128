/** Gradient check through the projection operator.
 *
 * The operator is linear in the stripe values, so for the toy loss
 * L(s) = ||W s||^2 / 2 the exact gradient is W^T (W s). We build W from the
 * sparse entries of a compiled operator, evaluate the analytic gradient, and
 * compare it against central finite differences of L. Agreement to ~1e-6
 * confirms the entry list is a faithful description of the linear map, which
 * is what a training loop differentiating through the pooling needs.
 *
 * Run with: npm run example
 */

import { execFileSync } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import { OperatorEntry, compileOperator } from "../src";

function makeScene(): string {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "projpool-example-"));
  const scenePath = path.join(dir, "scene.json");
  try {
    execFileSync(process.env.PROJPOOL_BIN ?? "projpool", [
      "synth", "--seed", "5", "--vertices", "8", "--cameras", "2", "--out", scenePath,
    ]);
    return fs.readFileSync(scenePath, "utf8");
  } finally {
    fs.rmSync(dir, { recursive: true, force: true });
  }
}

const handle = compileOperator(makeScene(), "average", 1);
console.log(`operator: ${handle.entryCount} entries over a ` +
  `${handle.gridRows}x${handle.gridCols} grid, ${handle.stripeWidths.length} images`);

// Flatten all stripes into one vector s; each (image, stripeCol) pair is one
// input coordinate. Output coordinates are (image, row, col) triples so that
// contributions from different images stay separate (the max fusion that
// follows pooling is handled downstream; W itself is per-image and linear).
const offsets: number[] = [];
let nIn = 0;
for (const w of handle.stripeWidths) {
  offsets.push(nIn);
  nIn += w;
}

const outIndex = new Map<string, number>();
const rows: { out: number; inp: number; w: number }[] = [];
for (const [img, r, c, sc, w] of handle.entries as OperatorEntry[]) {
  const key = `${img}:${r}:${c}`;
  if (!outIndex.has(key)) outIndex.set(key, outIndex.size);
  rows.push({ out: outIndex.get(key)!, inp: offsets[img] + sc, w });
}
const nOut = outIndex.size;

function apply(s: Float64Array): Float64Array {
  const y = new Float64Array(nOut);
  for (const { out, inp, w } of rows) y[out] += w * s[inp];
  return y;
}

function applyAdjoint(y: Float64Array): Float64Array {
  const g = new Float64Array(nIn);
  for (const { out, inp, w } of rows) g[inp] += w * y[out];
  return g;
}

function loss(s: Float64Array): number {
  const y = apply(s);
  let acc = 0;
  for (const v of y) acc += v * v;
  return acc / 2;
}

// deterministic pseudo-random stripe values
const s = new Float64Array(nIn);
for (let i = 0; i < nIn; i++) s[i] = Math.sin(3.7 * i + 0.5);

const grad = applyAdjoint(apply(s));

const h = 1e-5;
let maxAbsErr = 0;
let maxGrad = 0;
for (let i = 0; i < nIn; i++) {
  const save = s[i];
  s[i] = save + h;
  const up = loss(s);
  s[i] = save - h;
  const down = loss(s);
  s[i] = save;
  const fd = (up - down) / (2 * h);
  maxAbsErr = Math.max(maxAbsErr, Math.abs(fd - grad[i]));
  maxGrad = Math.max(maxGrad, Math.abs(grad[i]));
}

const rel = maxAbsErr / Math.max(maxGrad, 1e-30);
console.log(`inputs: ${nIn}  outputs: ${nOut}`);
console.log(`max |finite-diff - analytic| = ${maxAbsErr.toExponential(3)} (relative ${rel.toExponential(3)})`);
if (rel > 1e-6) {
  console.error("FAIL: gradient mismatch");
  process.exit(1);
}
console.log("OK: analytic gradient matches finite differences");
