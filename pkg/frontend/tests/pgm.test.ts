import { describe, expect, it } from "vitest";

import { base64ToBytes, decodePgm } from "../src/pgm.js";

function pgmBytes(header: string, raster: number[]): Uint8Array {
  const h = new TextEncoder().encode(header);
  const out = new Uint8Array(h.length + raster.length);
  out.set(h);
  out.set(raster, h.length);
  return out;
}

describe("decodePgm", () => {
  it("decodes a plain binary PGM", () => {
    const img = decodePgm(pgmBytes("P5\n3 2\n255\n", [0, 85, 170, 255, 0, 1]));
    expect(img.cols).toBe(3);
    expect(img.rows).toBe(2);
    expect(img.maxval).toBe(255);
    expect(Array.from(img.pixels)).toEqual([0, 85, 170, 255, 0, 1]);
  });

  it("tolerates comments and mixed whitespace in the header", () => {
    const img = decodePgm(
      pgmBytes("P5 # a comment\n 2\t2 # size\n255\n", [9, 8, 7, 6]),
    );
    expect([img.rows, img.cols]).toEqual([2, 2]);
    expect(Array.from(img.pixels)).toEqual([9, 8, 7, 6]);
  });

  it("rejects non-P5 and truncated input", () => {
    expect(() => decodePgm(pgmBytes("P2\n2 2\n255\n", [1, 2, 3, 4]))).toThrow(
      /P5/,
    );
    expect(() => decodePgm(pgmBytes("P5\n4 4\n255\n", [1, 2]))).toThrow(
      /truncated/,
    );
  });
});

describe("base64ToBytes", () => {
  it("round-trips binary data", () => {
    const raw = pgmBytes("P5\n2 1\n255\n", [200, 100]);
    const b64 = Buffer.from(raw).toString("base64");
    expect(Array.from(base64ToBytes(b64))).toEqual(Array.from(raw));
    const img = decodePgm(base64ToBytes(b64));
    expect(Array.from(img.pixels)).toEqual([200, 100]);
  });
});
