import fs from "node:fs";
import os from "node:os";
import path from "node:path";
import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { AdapterError } from "../src/errors.js";
import { decodeFvec, encodeFvec, readFvec, writeFvec } from "../src/fvec.js";

let tmp: string;

beforeEach(() => {
  tmp = fs.mkdtempSync(path.join(os.tmpdir(), "fvec-"));
});

afterEach(() => {
  fs.rmSync(tmp, { recursive: true, force: true });
});

function rows(n: number, d: number): Float32Array[] {
  const out: Float32Array[] = [];
  for (let i = 0; i < n; i++) {
    const row = new Float32Array(d);
    for (let j = 0; j < d; j++) {
      row[j] = Math.fround(i * 0.25 + j * 0.5);
    }
    out.push(row);
  }
  return out;
}

describe("fvec codec", () => {
  it("round-trips through a file", () => {
    const original = rows(3, 4);
    const file = path.join(tmp, "x.fvec");
    writeFvec(original, 4, file);
    const back = readFvec(file);
    expect(back.n).toBe(3);
    expect(back.d).toBe(4);
    for (let i = 0; i < 3; i++) {
      for (let j = 0; j < 4; j++) {
        expect(back.data[i * 4 + j]).toBe(original[i][j]);
      }
    }
  });

  it("has the documented byte layout", () => {
    const buf = encodeFvec(rows(2, 1), 1);
    expect(buf.subarray(0, 4).toString("ascii")).toBe("FVEC");
    expect(buf.readUInt32LE(4)).toBe(2);
    expect(buf.readUInt32LE(8)).toBe(1);
    expect(buf.length).toBe(12 + 2 * 4);
  });

  it("rejects bad magic at offset 0", () => {
    const buf = encodeFvec(rows(2, 2), 2);
    buf[0] = 0x58;
    expect(() => decodeFvec(buf)).toThrowError(/byte offset 0/);
  });

  it("rejects a truncated payload at the file length", () => {
    const buf = encodeFvec(rows(2, 2), 2);
    const cut = buf.subarray(0, buf.length - 3);
    expect(() => decodeFvec(Buffer.from(cut))).toThrowError(
      new RegExp(`byte offset ${cut.length}`),
    );
  });

  it("rejects trailing bytes at the expected end", () => {
    const buf = encodeFvec(rows(2, 2), 2);
    const padded = Buffer.concat([buf, Buffer.from([1, 2])]);
    expect(() => decodeFvec(padded)).toThrowError(new RegExp(`byte offset ${buf.length}`));
  });

  it("rejects non-finite values with the element offset", () => {
    const buf = encodeFvec(rows(2, 2), 2);
    buf.writeFloatLE(Number.NaN, 12 + 3 * 4);
    expect(() => decodeFvec(buf)).toThrowError(/element 3/);
  });

  it("refuses to encode fewer than 2 rows", () => {
    expect(() => encodeFvec(rows(1, 4), 4)).toThrowError(AdapterError);
  });

  it("refuses to decode a header claiming fewer than 2 rows", () => {
    const buf = encodeFvec(rows(2, 2), 2);
    buf.writeUInt32LE(1, 4);
    const shortened = buf.subarray(0, 12 + 2 * 4);
    expect(() => decodeFvec(Buffer.from(shortened))).toThrowError(/at least 2 rows/);
  });

  it("refuses rows whose width disagrees with the dimension", () => {
    const bad = [new Float32Array(3), new Float32Array(4)];
    expect(() => encodeFvec(bad, 3)).toThrowError(/row 1/);
  });

  it("reports missing files as asset errors", () => {
    try {
      readFvec(path.join(tmp, "ghost.fvec"));
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(AdapterError);
      expect((err as AdapterError).kind).toBe("asset");
    }
  });

  it("leaves no temp files behind after writing", () => {
    writeFvec(rows(2, 2), 2, path.join(tmp, "out.fvec"));
    const leftovers = fs.readdirSync(tmp).filter((n) => n.startsWith(".tmp-"));
    expect(leftovers).toEqual([]);
  });
});
