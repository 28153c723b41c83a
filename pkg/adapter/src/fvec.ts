/**
 * FVEC feature-file codec.
 *
 * Layout: 4-byte magic "FVEC", then row count n and dimension d as
 * unsigned 32-bit little-endian, then n*d float32 little-endian values
 * in row-major order. Files describe a set of per-image embeddings, so
 * n must be at least 2 (a single row cannot carry a covariance).
 */
import fs from "node:fs";
import path from "node:path";

import { assetError, formatError, validationError } from "./errors.js";

export const FVEC_MAGIC = Buffer.from("FVEC", "ascii");
const HEADER_BYTES = 12;

export interface FeatureSet {
  n: number;
  d: number;
  /** Row-major, length n*d. */
  data: Float32Array;
}

export function encodeFvec(rows: Float32Array[], dim: number): Buffer {
  if (rows.length < 2) {
    throw validationError(`a feature set needs at least 2 rows, got ${rows.length}`);
  }
  for (let i = 0; i < rows.length; i++) {
    if (rows[i].length !== dim) {
      throw validationError(`row ${i} has ${rows[i].length} values, expected ${dim}`);
    }
    for (let j = 0; j < dim; j++) {
      if (!Number.isFinite(rows[i][j])) {
        throw validationError(`row ${i} element ${j} is not finite`);
      }
    }
  }
  const out = Buffer.alloc(HEADER_BYTES + rows.length * dim * 4);
  FVEC_MAGIC.copy(out, 0);
  out.writeUInt32LE(rows.length, 4);
  out.writeUInt32LE(dim, 8);
  for (let i = 0; i < rows.length; i++) {
    for (let j = 0; j < dim; j++) {
      out.writeFloatLE(rows[i][j], HEADER_BYTES + (i * dim + j) * 4);
    }
  }
  return out;
}

/** Write a feature file in one shot: temp file in the same directory,
 * then an atomic rename over the destination. */
export function writeFvec(rows: Float32Array[], dim: number, outPath: string): void {
  const encoded = encodeFvec(rows, dim);
  const dir = path.dirname(outPath);
  fs.mkdirSync(dir, { recursive: true });
  const tmp = path.join(dir, `.tmp-${process.pid}-${path.basename(outPath)}`);
  try {
    fs.writeFileSync(tmp, encoded);
    fs.renameSync(tmp, outPath);
  } catch (err) {
    fs.rmSync(tmp, { force: true });
    throw err;
  }
}

export function decodeFvec(buf: Buffer): FeatureSet {
  if (buf.length < 4 || !buf.subarray(0, 4).equals(FVEC_MAGIC)) {
    throw formatError("bad magic, expected FVEC", 0);
  }
  if (buf.length < HEADER_BYTES) {
    throw formatError("truncated header", buf.length);
  }
  const n = buf.readUInt32LE(4);
  const d = buf.readUInt32LE(8);
  const expected = HEADER_BYTES + n * d * 4;
  if (buf.length < expected) {
    throw formatError(`payload truncated, expected ${expected} bytes`, buf.length);
  }
  if (buf.length > expected) {
    throw formatError(`${buf.length - expected} trailing bytes after payload`, expected);
  }
  if (n < 2) {
    throw formatError(`feature set needs at least 2 rows, header says ${n}`, 4);
  }
  const data = new Float32Array(n * d);
  for (let i = 0; i < n * d; i++) {
    const value = buf.readFloatLE(HEADER_BYTES + i * 4);
    if (!Number.isFinite(value)) {
      throw formatError(`non-finite value at element ${i}`, HEADER_BYTES + i * 4);
    }
    data[i] = value;
  }
  return { n, d, data };
}

export function readFvec(filePath: string): FeatureSet {
  let buf: Buffer;
  try {
    buf = fs.readFileSync(filePath);
  } catch (err) {
    throw assetError(`cannot read feature file ${filePath}: ${(err as Error).message}`);
  }
  return decodeFvec(buf);
}
