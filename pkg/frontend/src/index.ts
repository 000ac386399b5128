/** Node bindings for the projpool engine.
 *
 * All heavy lifting is delegated to the `projpool` CLI through its public
 * file formats (scene JSON, operator JSON, PPTF tensors), so results are
 * byte-identical to what the CLI produces. Set PROJPOOL_BIN to point at a
 * non-default executable.
 */

import { spawnSync } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import { ProjpoolError, errorFromCli } from "./errors";
import { Tensor, decodeTensor, encodeTensor } from "./pptf";

export { ProjpoolError, ENGINE_ERROR_NAMES } from "./errors";
export { Tensor, decodeTensor, encodeTensor } from "./pptf";

/** one sparse operator entry: [imageId, row, col, stripeCol, weight] */
export type OperatorEntry = [number, number, number, number, number];

export interface OperatorHandle {
  readonly entryCount: number;
  readonly gridRows: number;
  readonly gridCols: number;
  readonly strategy: string;
  readonly thickness: number;
  readonly stripeWidths: number[];
  readonly entries: OperatorEntry[];
  /** canonical serialized operator, byte-identical to `projpool build-op` */
  readonly operatorText: string;
  /** the validated scene this operator was compiled from */
  readonly sceneText: string;
}

export interface Stripe {
  width: number;
  depth: number;
  /** row-major [width, depth] float32 values */
  data: Float32Array;
}

export interface PooledResult {
  rows: number;
  cols: number;
  depth: number;
  /** row-major [rows, cols, depth] fused features */
  values: Float32Array;
  /** row-major [rows, cols]; 1 where some image wrote the cell */
  written: Uint8Array;
}

function cliBin(): string {
  return process.env.PROJPOOL_BIN ?? "projpool";
}

function runCli(args: string[]): void {
  const res = spawnSync(cliBin(), args, { encoding: "utf8" });
  if (res.error) {
    throw new ProjpoolError("ProjpoolError", `failed to launch projpool: ${res.error.message}`);
  }
  if (res.status !== 0) {
    throw errorFromCli(res.stderr ?? "", res.status);
  }
}

function withTempDir<T>(fn: (dir: string) => T): T {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "projpool-"));
  try {
    return fn(dir);
  } finally {
    fs.rmSync(dir, { recursive: true, force: true });
  }
}

/** Compile a scene document into a projection operator. */
export function compileOperator(
  sceneText: string,
  strategy = "average",
  thickness = 1,
): OperatorHandle {
  return withTempDir((dir) => {
    const scenePath = path.join(dir, "scene.json");
    const opPath = path.join(dir, "op.json");
    fs.writeFileSync(scenePath, sceneText, "utf8");
    runCli([
      "build-op", scenePath,
      "--strategy", strategy,
      "--thickness", String(thickness),
      "--out", opPath,
    ]);
    const operatorText = fs.readFileSync(opPath, "ascii");
    const doc = JSON.parse(operatorText);
    return {
      entryCount: doc.entries.length,
      gridRows: doc.grid.rows,
      gridCols: doc.grid.cols,
      strategy: doc.strategy,
      thickness: doc.thickness,
      stripeWidths: doc.stripe_widths,
      entries: doc.entries as OperatorEntry[],
      operatorText,
      sceneText,
    };
  });
}

function checkStripes(handle: OperatorHandle, stripes: Map<number, Stripe>): number {
  let depth: number | null = null;
  for (const [i, s] of stripes) {
    if (s.data.length !== s.width * s.depth) {
      throw new ProjpoolError(
        "WrongRank",
        `stripe ${i} data length ${s.data.length} != width*depth ${s.width * s.depth}`,
      );
    }
    if (i < handle.stripeWidths.length && s.width !== handle.stripeWidths[i]) {
      throw new ProjpoolError(
        "WidthMismatch",
        `stripe ${i} has width ${s.width}, operator expects ${handle.stripeWidths[i]}`,
      );
    }
    if (depth === null) {
      depth = s.depth;
    } else if (s.depth !== depth) {
      throw new ProjpoolError("DepthMismatch", `stripe ${i} depth ${s.depth} != ${depth}`);
    }
  }
  for (const [imageId] of handle.entries) {
    if (!stripes.has(imageId)) {
      throw new ProjpoolError(
        "MissingStripe",
        `operator references image ${imageId} with no stripe`,
      );
    }
  }
  return depth ?? 0;
}

/** Project stripes through the operator and max-fuse across images.
 * Bit-identical to `projpool pool` on the same inputs. */
export function pool(
  handle: OperatorHandle,
  stripes: Map<number, Stripe>,
): PooledResult {
  const depth = checkStripes(handle, stripes);
  const { gridRows: rows, gridCols: cols } = handle;

  const written = new Uint8Array(rows * cols);
  for (const [imageId, r, c] of handle.entries) {
    if (stripes.has(imageId)) {
      written[r * cols + c] = 1;
    }
  }

  if (handle.entryCount === 0 || depth === 0) {
    return { rows, cols, depth, values: new Float32Array(rows * cols * depth), written };
  }

  return withTempDir((dir) => {
    const scenePath = path.join(dir, "scene.json");
    const opPath = path.join(dir, "op.json");
    const featDir = path.join(dir, "feats");
    const outDir = path.join(dir, "out");
    fs.writeFileSync(scenePath, handle.sceneText, "utf8");
    fs.writeFileSync(opPath, handle.operatorText, "ascii");
    fs.mkdirSync(featDir);
    // one file per camera; a [1, w, d] feature map height-averages to the
    // stripe itself, so the CLI pools exactly the buffers we were given
    const nCameras = JSON.parse(handle.sceneText).cameras.length;
    for (let i = 0; i < nCameras; i++) {
      const s = stripes.get(i);
      const width = s ? s.width : handle.stripeWidths[i];
      const data = s ? s.data : new Float32Array(width * depth);
      fs.writeFileSync(
        path.join(featDir, `sv_${i}.pptf`),
        encodeTensor({ dims: [1, width, depth], data }),
      );
    }
    runCli([
      "pool", scenePath,
      "--op", opPath,
      "--features", featDir,
      "--splits", "1",
      "--out-dir", outDir,
    ]);
    const pooled = decodeTensor(fs.readFileSync(path.join(outDir, "pooled.pptf")));
    return { rows, cols, depth, values: pooled.data, written };
  });
}

/** Average a [h, w, d] feature map over height into a [w, d*splits] stripe,
 * cutting the height into `splits` equal top-to-bottom bands first. */
export function stripeFromFeatmap(featmap: Tensor, splits = 1): Tensor {
  if (featmap.dims.length !== 3) {
    throw new ProjpoolError(
      "WrongRank",
      `feature map must be rank 3, got rank ${featmap.dims.length}`,
    );
  }
  const [h, w, d] = featmap.dims;
  if (splits < 1 || h % splits !== 0) {
    throw new ProjpoolError(
      "IndivisibleHeight",
      `height ${h} is not divisible by ${splits} bands`,
    );
  }
  const band = h / splits;
  const out = new Float32Array(w * splits * d);
  for (let k = 0; k < splits; k++) {
    for (let x = 0; x < w; x++) {
      for (let c = 0; c < d; c++) {
        let acc = 0.0;
        for (let y = k * band; y < (k + 1) * band; y++) {
          acc += featmap.data[(y * w + x) * d + c];
        }
        out[x * (splits * d) + k * d + c] = Math.fround(acc / band);
      }
    }
  }
  return { dims: [w, splits * d], data: out };
}
