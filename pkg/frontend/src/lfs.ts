/**
 * Labeled feature set container (little-endian):
 * "LFSV" magic, version byte 0x01, u32 N, u32 d, u32 C,
 * u16 metadata length, UTF-8 metadata, then N records of
 * (u32 label, d x f32 features).
 */

import { readFileSync, writeFileSync, renameSync } from "node:fs";
import { join, dirname, basename } from "node:path";

export const LFS_MAGIC = "LFSV";
export const LFS_VERSION = 1;

export interface LabeledFeatureSet {
  features: Float32Array[]; // N rows of length d
  labels: Uint32Array; // N labels in [0, C)
  numClasses: number;
  metadata: string;
}

export class LfsFormatError extends Error {}

export function encodeLfs(set: LabeledFeatureSet): Buffer {
  const n = set.labels.length;
  if (set.features.length !== n) {
    throw new LfsFormatError(
      `label count ${n} does not match feature row count ${set.features.length}`,
    );
  }
  const d = n > 0 ? set.features[0].length : 0;
  for (const row of set.features) {
    if (row.length !== d) {
      throw new LfsFormatError("feature rows have inconsistent dimension");
    }
  }
  for (const label of set.labels) {
    if (label >= set.numClasses) {
      throw new LfsFormatError(
        `label ${label} out of range for ${set.numClasses} classes`,
      );
    }
  }
  const meta = Buffer.from(set.metadata, "utf-8");
  if (meta.length > 0xffff) {
    throw new LfsFormatError("metadata exceeds 65535 bytes");
  }
  const header = Buffer.alloc(4 + 1 + 12 + 2);
  header.write(LFS_MAGIC, 0, "ascii");
  header.writeUInt8(LFS_VERSION, 4);
  header.writeUInt32LE(n, 5);
  header.writeUInt32LE(d, 9);
  header.writeUInt32LE(set.numClasses, 13);
  header.writeUInt16LE(meta.length, 17);
  const record = 4 + 4 * d;
  const body = Buffer.alloc(n * record);
  for (let i = 0; i < n; i++) {
    const off = i * record;
    body.writeUInt32LE(set.labels[i], off);
    const view = new Float32Array(
      body.buffer,
      body.byteOffset + off + 4,
      d,
    );
    view.set(set.features[i]);
  }
  return Buffer.concat([header, meta, body]);
}

export function decodeLfs(raw: Buffer): LabeledFeatureSet {
  if (raw.length < 19) {
    throw new LfsFormatError("truncated header");
  }
  if (raw.toString("ascii", 0, 4) !== LFS_MAGIC) {
    throw new LfsFormatError(`bad magic ${raw.toString("hex", 0, 4)}`);
  }
  const version = raw.readUInt8(4);
  if (version !== LFS_VERSION) {
    throw new LfsFormatError(`unsupported version ${version}`);
  }
  const n = raw.readUInt32LE(5);
  const d = raw.readUInt32LE(9);
  const numClasses = raw.readUInt32LE(13);
  const metaLen = raw.readUInt16LE(17);
  let offset = 19;
  const metadata = raw.toString("utf-8", offset, offset + metaLen);
  offset += metaLen;
  const record = 4 + 4 * d;
  if (raw.length !== offset + n * record) {
    throw new LfsFormatError(
      `expected ${offset + n * record} bytes, got ${raw.length}`,
    );
  }
  const labels = new Uint32Array(n);
  const features: Float32Array[] = [];
  for (let i = 0; i < n; i++) {
    const off = offset + i * record;
    labels[i] = raw.readUInt32LE(off);
    const row = new Float32Array(d);
    for (let j = 0; j < d; j++) {
      row[j] = raw.readFloatLE(off + 4 + 4 * j);
    }
    features.push(row);
  }
  return { features, labels, numClasses, metadata };
}

export function writeLfs(path: string, set: LabeledFeatureSet): void {
  const tmp = join(dirname(path), `.${basename(path)}.tmp`);
  writeFileSync(tmp, encodeLfs(set));
  renameSync(tmp, path);
}

export function readLfs(path: string): LabeledFeatureSet {
  return decodeLfs(readFileSync(path));
}
