import { describe, expect, it } from "vitest";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { decodeLfs, encodeLfs, LfsFormatError, readLfs, writeLfs } from "../src/lfs.js";

function sample() {
  return {
    features: [
      new Float32Array([1, 2, 3]),
      new Float32Array([4, 5, 6]),
      new Float32Array([-1.5, 0, 2.25]),
      new Float32Array([7, 8, 9]),
    ],
    labels: new Uint32Array([0, 1, 0, 1]),
    numClasses: 2,
    metadata: '{"layer":"test"}',
  };
}

describe("labeled feature set binary format", () => {
  it("round-trips through encode/decode", () => {
    const set = sample();
    const back = decodeLfs(encodeLfs(set));
    expect(back.numClasses).toBe(2);
    expect(back.metadata).toBe(set.metadata);
    expect(Array.from(back.labels)).toEqual([0, 1, 0, 1]);
    back.features.forEach((row, i) =>
      expect(Array.from(row)).toEqual(Array.from(set.features[i])),
    );
  });

  it("writes the documented header bytes", () => {
    const buf = encodeLfs(sample());
    expect(buf.subarray(0, 4).toString("ascii")).toBe("LFSV");
    expect(buf.readUInt8(4)).toBe(1);
    expect(buf.readUInt32LE(5)).toBe(4); // rows
    expect(buf.readUInt32LE(9)).toBe(3); // dim
    expect(buf.readUInt32LE(13)).toBe(2); // classes
  });

  it("rejects bad magic, truncation, and label overflow", () => {
    const buf = encodeLfs(sample());
    const bad = Buffer.from(buf);
    bad.write("XXXX", 0, "ascii");
    expect(() => decodeLfs(bad)).toThrow(LfsFormatError);
    expect(() => decodeLfs(buf.subarray(0, buf.length - 3))).toThrow(
      LfsFormatError,
    );
    const set = sample();
    set.labels = new Uint32Array([0, 1, 0, 5]);
    expect(() => encodeLfs(set)).toThrow(LfsFormatError);
  });

  it("rejects ragged feature rows", () => {
    const set = sample();
    set.features[2] = new Float32Array([1, 2]);
    expect(() => encodeLfs(set)).toThrow(LfsFormatError);
  });

  it("round-trips through the filesystem", () => {
    const dir = mkdtempSync(join(tmpdir(), "lfs-"));
    const path = join(dir, "x.lfs");
    writeLfs(path, sample());
    const back = readLfs(path);
    expect(back.features.length).toBe(4);
    expect(readFileSync(path).readUInt8(4)).toBe(1);
  });
});
