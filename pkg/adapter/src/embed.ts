/**
 * Image directory -> FVEC embeddings.
 *
 * The output dimension is fixed at 2048 to match the pooled feature
 * width downstream tooling expects. A real network backend can plug in
 * through the EmbeddingBackend interface; the built-in backend is a
 * deterministic stand-in (no pretrained weights ship with this
 * package) whose preprocessing is pinned below and recorded in a
 * sidecar notes file next to every output. Change the preprocessing
 * and you must bump the backend name, otherwise scores computed before
 * and after the change would be silently incomparable.
 */
import fs from "node:fs";
import path from "node:path";

import { validationError } from "./errors.js";
import { writeFvec } from "./fvec.js";
import { DecodedImage, readPng } from "./png.js";

export const EMBEDDING_DIM = 2048;
const RESIZE_TO = 299;

export interface EmbeddingBackend {
  /** Versioned identifier, e.g. "histogram-v1"; goes into the sidecar. */
  name: string;
  dim: number;
  /** Human-readable preprocessing description for the sidecar. */
  notes: Record<string, unknown>;
  embed(image: DecodedImage): Float32Array;
}

export interface EmbeddingJob {
  imageDir: string;
  outPath: string;
  batchSize?: number;
  backend?: EmbeddingBackend;
}

export interface EmbeddingResult {
  outPath: string;
  notesPath: string;
  written: number;
  skipped: string[];
}

/** Bilinear resample of the RGB channels to a fixed square; alpha is
 * dropped (map scans are opaque). Pixel centers map to pixel centers. */
export function resizeRgb(image: DecodedImage, side: number): Uint8Array {
  const { width, height, data } = image;
  const out = new Uint8Array(side * side * 3);
  for (let y = 0; y < side; y++) {
    const sy = ((y + 0.5) * height) / side - 0.5;
    const y0 = Math.max(0, Math.min(height - 1, Math.floor(sy)));
    const y1 = Math.min(height - 1, y0 + 1);
    const fy = Math.max(0, Math.min(1, sy - y0));
    for (let x = 0; x < side; x++) {
      const sx = ((x + 0.5) * width) / side - 0.5;
      const x0 = Math.max(0, Math.min(width - 1, Math.floor(sx)));
      const x1 = Math.min(width - 1, x0 + 1);
      const fx = Math.max(0, Math.min(1, sx - x0));
      for (let c = 0; c < 3; c++) {
        const p00 = data[(y0 * width + x0) * 4 + c];
        const p01 = data[(y0 * width + x1) * 4 + c];
        const p10 = data[(y1 * width + x0) * 4 + c];
        const p11 = data[(y1 * width + x1) * 4 + c];
        const top = p00 + (p01 - p00) * fx;
        const bottom = p10 + (p11 - p10) * fx;
        out[(y * side + x) * 3 + c] = Math.floor(top + (bottom - top) * fy + 0.5);
      }
    }
  }
  return out;
}

/**
 * Built-in deterministic backend, "histogram-v1".
 *
 * Preprocessing: decode to RGBA, drop alpha, bilinear-resize to
 * 299x299 (the input size convention of the network this stands in
 * for). Features: joint RGB histogram with 8x16x16 = 2048 bins
 * (red quantized to 8 levels, green and blue to 16), L1-normalized
 * over the 299*299 samples. Deterministic by construction.
 */
export function histogramBackend(): EmbeddingBackend {
  return {
    name: "histogram-v1",
    dim: EMBEDDING_DIM,
    notes: {
      preprocessing: `drop alpha, bilinear resize to ${RESIZE_TO}x${RESIZE_TO}, pixel-center sampling`,
      features: "joint RGB histogram, bins (r: 8, g: 16, b: 16), L1-normalized",
    },
    embed(image: DecodedImage): Float32Array {
      const rgb = resizeRgb(image, RESIZE_TO);
      const counts = new Float64Array(EMBEDDING_DIM);
      const pixels = RESIZE_TO * RESIZE_TO;
      for (let i = 0; i < pixels; i++) {
        const r = rgb[i * 3] >> 5;
        const g = rgb[i * 3 + 1] >> 4;
        const b = rgb[i * 3 + 2] >> 4;
        counts[(r * 16 + g) * 16 + b] += 1;
      }
      const out = new Float32Array(EMBEDDING_DIM);
      for (let i = 0; i < EMBEDDING_DIM; i++) {
        out[i] = counts[i] / pixels;
      }
      return out;
    },
  };
}

export async function extractEmbeddings(job: EmbeddingJob): Promise<EmbeddingResult> {
  const backend = job.backend ?? histogramBackend();
  if (backend.dim !== EMBEDDING_DIM) {
    throw validationError(
      `backend ${backend.name} emits ${backend.dim} dims, the interchange format is pinned to ${EMBEDDING_DIM}`,
    );
  }
  const batchSize = job.batchSize ?? 16;
  if (batchSize < 1) {
    throw validationError(`batch size must be positive, got ${batchSize}`);
  }

  let names: string[];
  try {
    names = fs.readdirSync(job.imageDir).filter((n) => n.toLowerCase().endsWith(".png"));
  } catch (err) {
    throw validationError(`cannot list image directory ${job.imageDir}: ${(err as Error).message}`);
  }
  names.sort();
  if (names.length === 0) {
    throw validationError(`no .png images in ${job.imageDir}`);
  }

  const rows: Float32Array[] = [];
  const skipped: string[] = [];
  for (let start = 0; start < names.length; start += batchSize) {
    const batch = names.slice(start, start + batchSize);
    const embedded = await Promise.all(
      batch.map(async (name) => {
        try {
          return backend.embed(readPng(path.join(job.imageDir, name)));
        } catch {
          return name; // unreadable: report, keep going
        }
      }),
    );
    for (const item of embedded) {
      if (typeof item === "string") {
        skipped.push(item);
      } else {
        rows.push(item);
      }
    }
  }

  if (rows.length < 2) {
    throw validationError(
      `need at least 2 readable images to form a feature file, got ${rows.length} ` +
        `(${skipped.length} skipped)`,
    );
  }

  writeFvec(rows, backend.dim, job.outPath);
  const notesPath = job.outPath + ".notes.json";
  const notes = {
    backend: backend.name,
    dim: backend.dim,
    images: rows.length,
    skipped,
    ...backend.notes,
  };
  fs.writeFileSync(notesPath, JSON.stringify(notes, null, 2) + "\n");
  return { outPath: job.outPath, notesPath, written: rows.length, skipped };
}
