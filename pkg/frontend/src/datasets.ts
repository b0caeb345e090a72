/**
 * Dataset loaders: CIFAR-10 from its binary distribution on local disk, and
 * a seeded synthetic blob dataset for exercising the pipeline without
 * downloads.
 */

import { existsSync, readFileSync } from "node:fs";
import { join } from "node:path";

export interface Dataset {
  name: string;
  numClasses: number;
  /** Row-major sample tensors, one Float32Array per sample. */
  samples: Float32Array[];
  labels: Uint32Array;
  /** Shape of one sample, e.g. [32, 32, 3]. */
  sampleShape: number[];
}

export class DatasetError extends Error {}

const CIFAR_RECORD = 1 + 32 * 32 * 3;
const CIFAR_TEST_FILE = "test_batch.bin";

/**
 * Loads the CIFAR-10 test split from the extracted binary distribution
 * (cifar-10-batches-bin). Values are scaled to [0, 1]; the channel-first
 * records are transposed to HWC row-major order.
 */
export function loadCifar10(dir: string, sampleCap: number): Dataset {
  const path = join(dir, CIFAR_TEST_FILE);
  if (!existsSync(path)) {
    throw new DatasetError(
      `CIFAR-10 binary not found at ${path}. Download ` +
        "cifar-10-binary.tar.gz from https://www.cs.toronto.edu/~kriz/cifar.html, " +
        "extract it, and re-run with --data-dir pointing at cifar-10-batches-bin. " +
        "This environment cannot reach that host; fetch the archive elsewhere " +
        "and copy it in, then retry.",
    );
  }
  const raw = readFileSync(path);
  if (raw.length % CIFAR_RECORD !== 0) {
    throw new DatasetError(
      `${path}: size ${raw.length} is not a multiple of ${CIFAR_RECORD}`,
    );
  }
  const total = Math.min(raw.length / CIFAR_RECORD, sampleCap);
  const samples: Float32Array[] = [];
  const labels = new Uint32Array(total);
  for (let i = 0; i < total; i++) {
    const off = i * CIFAR_RECORD;
    labels[i] = raw.readUInt8(off);
    const sample = new Float32Array(32 * 32 * 3);
    for (let c = 0; c < 3; c++) {
      for (let p = 0; p < 32 * 32; p++) {
        sample[p * 3 + c] = raw.readUInt8(off + 1 + c * 32 * 32 + p) / 255;
      }
    }
    samples.push(sample);
  }
  return {
    name: "cifar10",
    numClasses: 10,
    samples,
    labels,
    sampleShape: [32, 32, 3],
  };
}

/** Deterministic PRNG (mulberry32), so synthetic runs are reproducible. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/**
 * Gaussian-ish blob dataset: each class sits at a distinct corner of a
 * hypercube with unit noise on every coordinate. Dimension 8, values seeded.
 */
export function syntheticBlobs(
  numClasses: number,
  perClass: number,
  seed = 0,
): Dataset {
  const dim = 8;
  const rand = mulberry32(seed);
  const gauss = () => {
    // Box-Muller using the seeded uniform source.
    const u = Math.max(rand(), 1e-12);
    const v = rand();
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  };
  const samples: Float32Array[] = [];
  const labels = new Uint32Array(numClasses * perClass);
  let i = 0;
  for (let cls = 0; cls < numClasses; cls++) {
    for (let k = 0; k < perClass; k++, i++) {
      const row = new Float32Array(dim);
      for (let j = 0; j < dim; j++) {
        const corner = (cls >> j % 3) & 1 ? 4 : -4;
        row[j] = (j < 3 ? corner : 0) + gauss();
      }
      labels[i] = cls;
      samples.push(row);
    }
  }
  return {
    name: "synthetic",
    numClasses,
    samples,
    labels,
    sampleShape: [dim],
  };
}

export function loadDataset(
  name: string,
  sampleCap: number,
  dataDir: string,
  seed = 0,
): Dataset {
  if (name === "cifar10") {
    return loadCifar10(dataDir, sampleCap);
  }
  if (name === "synthetic") {
    const perClass = Math.floor(sampleCap / 4);
    return syntheticBlobs(4, perClass, seed);
  }
  throw new DatasetError(
    `unknown dataset ${JSON.stringify(name)}; available: cifar10, synthetic`,
  );
}
