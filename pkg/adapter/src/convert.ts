/**
 * External prediction masks -> the toolkit's mask PNG format
 * (8-bit grayscale, values 1..5).
 *
 * Two input shapes are handled. Index masks already hold class values
 * and are validated then copied byte for byte. Colorized masks hold an
 * RGB rendering and are inverted through a palette; any pixel color
 * the palette does not name is an error, reported with its value.
 */
import fs from "node:fs";
import path from "node:path";

import { AdapterError, validationError } from "./errors.js";
import { readPng, writeGrayPng } from "./png.js";

export const CLASS_COUNT = 5;

/** Inspection palette of the mask renderer, class id -> RGB. */
export const DEFAULT_PALETTE: ReadonlyMap<number, [number, number, number]> = new Map([
  [1, [170, 60, 50]],
  [2, [250, 250, 245]],
  [3, [120, 170, 90]],
  [4, [230, 220, 200]],
  [5, [140, 170, 200]],
]);

export type ConversionSpec =
  | { kind: "index" }
  | { kind: "palette"; palette: ReadonlyMap<number, [number, number, number]> };

export interface ConversionResult {
  outDir: string;
  converted: number;
}

export function loadPaletteFile(filePath: string): Map<number, [number, number, number]> {
  let doc: unknown;
  try {
    doc = JSON.parse(fs.readFileSync(filePath, "utf-8"));
  } catch (err) {
    throw validationError(`cannot read palette file ${filePath}: ${(err as Error).message}`);
  }
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    throw validationError(`palette file ${filePath} must hold an object of class -> [r, g, b]`);
  }
  const palette = new Map<number, [number, number, number]>();
  for (const [key, value] of Object.entries(doc)) {
    const classId = Number(key);
    if (!Number.isInteger(classId) || classId < 1 || classId > CLASS_COUNT) {
      throw validationError(`palette class ${key} is outside 1..${CLASS_COUNT}`);
    }
    if (!Array.isArray(value) || value.length !== 3 || value.some((v) => !Number.isInteger(v) || v < 0 || v > 255)) {
      throw validationError(`palette entry for class ${key} is not an [r, g, b] triple of bytes`);
    }
    palette.set(classId, [value[0], value[1], value[2]]);
  }
  if (palette.size === 0) {
    throw validationError(`palette file ${filePath} names no classes`);
  }
  return palette;
}

function checkIndexMask(filePath: string): void {
  const img = readPng(filePath);
  for (let i = 0; i < img.width * img.height; i++) {
    const r = img.data[i * 4];
    const g = img.data[i * 4 + 1];
    const b = img.data[i * 4 + 2];
    if (r !== g || g !== b) {
      throw validationError(
        `${path.basename(filePath)} is not an index mask: pixel ${i} has color (${r}, ${g}, ${b})`,
      );
    }
    if (r < 1 || r > CLASS_COUNT) {
      throw validationError(
        `${path.basename(filePath)} holds value ${r} outside classes 1..${CLASS_COUNT}`,
      );
    }
  }
}

function invertColorized(
  filePath: string,
  palette: ReadonlyMap<number, [number, number, number]>,
): { values: Uint8Array; width: number; height: number } {
  const img = readPng(filePath);
  const lookup = new Map<number, number>();
  for (const [classId, [r, g, b]] of palette) {
    lookup.set((r << 16) | (g << 8) | b, classId);
  }
  const values = new Uint8Array(img.width * img.height);
  for (let i = 0; i < values.length; i++) {
    const r = img.data[i * 4];
    const g = img.data[i * 4 + 1];
    const b = img.data[i * 4 + 2];
    const classId = lookup.get((r << 16) | (g << 8) | b);
    if (classId === undefined) {
      throw validationError(
        `${path.basename(filePath)} pixel ${i} has color (${r}, ${g}, ${b}) not in the palette`,
      );
    }
    values[i] = classId;
  }
  return { values, width: img.width, height: img.height };
}

/** Render an index mask through a palette; the inverse of the palette
 * conversion, used to verify round-trips. */
export function colorizeMask(
  values: Uint8Array,
  palette: ReadonlyMap<number, [number, number, number]>,
): Uint8Array {
  const rgb = new Uint8Array(values.length * 3);
  for (let i = 0; i < values.length; i++) {
    const entry = palette.get(values[i]);
    if (entry === undefined) {
      throw validationError(`mask value ${values[i]} has no palette entry`);
    }
    rgb[i * 3] = entry[0];
    rgb[i * 3 + 1] = entry[1];
    rgb[i * 3 + 2] = entry[2];
  }
  return rgb;
}

export function convertPredictions(
  srcDir: string,
  outDir: string,
  spec: ConversionSpec,
): ConversionResult {
  let names: string[];
  try {
    names = fs.readdirSync(srcDir).filter((n) => n.toLowerCase().endsWith(".png"));
  } catch (err) {
    throw validationError(`cannot list prediction directory ${srcDir}: ${(err as Error).message}`);
  }
  names.sort();
  if (names.length === 0) {
    throw validationError(`no .png predictions in ${srcDir}`);
  }
  if (path.resolve(srcDir) === path.resolve(outDir)) {
    throw validationError("output directory must differ from the source directory");
  }
  fs.mkdirSync(outDir, { recursive: true });

  for (const name of names) {
    const src = path.join(srcDir, name);
    const dst = path.join(outDir, name);
    if (spec.kind === "index") {
      checkIndexMask(src);
      fs.copyFileSync(src, dst);
    } else {
      const { values, width, height } = invertColorized(src, spec.palette);
      writeGrayPng(values, width, height, dst);
    }
  }
  return { outDir, converted: names.length };
}

export function isAdapterError(err: unknown): err is AdapterError {
  return err instanceof AdapterError;
}
