/** The engine's binary tensor container: "PPTF" magic, version 1, float32
 * little-endian payload, uint32 dims. Byte layouts here are normative and
 * must round-trip bit-exactly against files the CLI writes. */

import { ProjpoolError } from "./errors";

const MAGIC = Buffer.from("PPTF", "ascii");
const VERSION = 1;
const DTYPE_F32 = 1;

export interface Tensor {
  dims: number[];
  /** row-major values, length = product(dims) */
  data: Float32Array;
}

export function encodeTensor(t: Tensor): Buffer {
  if (t.dims.length < 1 || t.dims.some((d) => d < 1 || !Number.isInteger(d))) {
    throw new ProjpoolError(
      "ValidationError",
      `tensor dims must all be positive integers, got [${t.dims}]`,
    );
  }
  const count = t.dims.reduce((a, b) => a * b, 1);
  if (t.data.length !== count) {
    throw new ProjpoolError(
      "ValidationError",
      `payload has ${t.data.length} values, dims [${t.dims}] require ${count}`,
    );
  }
  const buf = Buffer.alloc(8 + 4 * t.dims.length + 4 * count);
  MAGIC.copy(buf, 0);
  buf.writeUInt8(VERSION, 4);
  buf.writeUInt8(DTYPE_F32, 5);
  buf.writeUInt8(t.dims.length, 6);
  buf.writeUInt8(0, 7);
  t.dims.forEach((d, i) => buf.writeUInt32LE(d, 8 + 4 * i));
  const base = 8 + 4 * t.dims.length;
  for (let i = 0; i < count; i++) {
    buf.writeFloatLE(t.data[i], base + 4 * i);
  }
  return buf;
}

export function decodeTensor(buf: Buffer): Tensor {
  if (buf.length < 8) {
    throw new ProjpoolError(
      "TruncatedPayload",
      `file too short for a tensor header (${buf.length} bytes)`,
    );
  }
  if (!buf.subarray(0, 4).equals(MAGIC)) {
    throw new ProjpoolError("BadMagic", `bad magic ${buf.subarray(0, 4)}`);
  }
  const version = buf.readUInt8(4);
  const dtype = buf.readUInt8(5);
  const ndim = buf.readUInt8(6);
  const reserved = buf.readUInt8(7);
  if (version !== VERSION || dtype !== DTYPE_F32 || reserved !== 0) {
    throw new ProjpoolError(
      "UnsupportedVersion",
      `unsupported header version=${version} dtype=${dtype} reserved=${reserved}`,
    );
  }
  if (buf.length < 8 + 4 * ndim) {
    throw new ProjpoolError("TruncatedPayload", "file ends inside the dims table");
  }
  const dims: number[] = [];
  for (let i = 0; i < ndim; i++) {
    dims.push(buf.readUInt32LE(8 + 4 * i));
  }
  if (ndim < 1 || dims.some((d) => d < 1)) {
    throw new ProjpoolError("ValidationError", `tensor dims must all be positive, got [${dims}]`);
  }
  const count = dims.reduce((a, b) => a * b, 1);
  const base = 8 + 4 * ndim;
  if (buf.length - base !== 4 * count) {
    throw new ProjpoolError(
      "TruncatedPayload",
      `payload is ${buf.length - base} bytes, dims [${dims}] require ${4 * count}`,
    );
  }
  const data = new Float32Array(count);
  for (let i = 0; i < count; i++) {
    data[i] = buf.readFloatLE(base + 4 * i);
  }
  return { dims, data };
}
