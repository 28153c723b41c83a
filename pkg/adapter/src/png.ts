/** Thin PNG layer over pngjs: everything decodes to RGBA, masks encode
 * as 8-bit grayscale so the toolkit's reader accepts them. */
import fs from "node:fs";
import path from "node:path";
import { PNG } from "pngjs";

import { assetError } from "./errors.js";

export interface DecodedImage {
  width: number;
  height: number;
  /** RGBA interleaved, 4 bytes per pixel. */
  data: Uint8Array;
}

export function readPng(filePath: string): DecodedImage {
  let buf: Buffer;
  try {
    buf = fs.readFileSync(filePath);
  } catch (err) {
    throw assetError(`cannot read ${filePath}: ${(err as Error).message}`);
  }
  let png: PNG;
  try {
    png = PNG.sync.read(buf);
  } catch (err) {
    throw assetError(`cannot decode ${filePath}: ${(err as Error).message}`);
  }
  return { width: png.width, height: png.height, data: new Uint8Array(png.data) };
}

/** Encode a single-channel index mask as grayscale (color type 0). */
export function writeGrayPng(values: Uint8Array, width: number, height: number, outPath: string): void {
  const png = new PNG({ width, height });
  // pngjs works on an RGBA buffer; colorType 0 at write time collapses it.
  for (let i = 0; i < width * height; i++) {
    const v = values[i];
    png.data[i * 4] = v;
    png.data[i * 4 + 1] = v;
    png.data[i * 4 + 2] = v;
    png.data[i * 4 + 3] = 255;
  }
  const encoded = PNG.sync.write(png, { colorType: 0 });
  fs.mkdirSync(path.dirname(outPath), { recursive: true });
  const tmp = path.join(path.dirname(outPath), `.tmp-${process.pid}-${path.basename(outPath)}`);
  try {
    fs.writeFileSync(tmp, encoded);
    fs.renameSync(tmp, outPath);
  } catch (err) {
    fs.rmSync(tmp, { force: true });
    throw err;
  }
}

/** Encode RGB (alpha forced opaque); used by tests to fabricate inputs. */
export function writeRgbPng(rgb: Uint8Array, width: number, height: number, outPath: string): void {
  const png = new PNG({ width, height });
  for (let i = 0; i < width * height; i++) {
    png.data[i * 4] = rgb[i * 3];
    png.data[i * 4 + 1] = rgb[i * 3 + 1];
    png.data[i * 4 + 2] = rgb[i * 3 + 2];
    png.data[i * 4 + 3] = 255;
  }
  const encoded = PNG.sync.write(png, { colorType: 2 });
  fs.mkdirSync(path.dirname(outPath), { recursive: true });
  fs.writeFileSync(outPath, encoded);
}
