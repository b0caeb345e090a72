/**
 * Per-layer feature extraction: runs a dataset through a model, captures
 * activations at the requested layers, and writes one labeled feature-set
 * file per layer plus a JSON manifest describing exactly what was run.
 */

import { writeFileSync, mkdirSync, renameSync } from "node:fs";
import { join } from "node:path";
import { loadDataset } from "./datasets.js";
import { captureActivations, loadModel } from "./model.js";
import { writeLfs } from "./lfs.js";

export class ExtractionSpecError extends Error {}

export interface ExtractionSpec {
  /** "synthetic" or a path/URL to a tf.js LayersModel. */
  model: string;
  /** "synthetic" or "cifar10". */
  dataset: string;
  /** Layer names to capture, in depth order. */
  layers: string[];
  /** Maximum number of samples to run. */
  sampleCap: number;
  outputDir: string;
  /** Directory holding dataset binaries (cifar10 only). */
  dataDir?: string;
  seed?: number;
}

export interface ExtractionManifest {
  model: string;
  weightsChecksum: string;
  dataset: string;
  numSamples: number;
  numClasses: number;
  layers: { name: string; shape: number[]; file: string }[];
  flattening: "row-major";
  preprocessing: string;
}

export function validateSpec(spec: ExtractionSpec): void {
  if (!spec.model) throw new ExtractionSpecError("model must be non-empty");
  if (!spec.dataset) throw new ExtractionSpecError("dataset must be non-empty");
  if (!spec.layers.length) {
    throw new ExtractionSpecError("at least one layer must be requested");
  }
  if (new Set(spec.layers).size !== spec.layers.length) {
    throw new ExtractionSpecError("layer names must be unique");
  }
  if (!Number.isInteger(spec.sampleCap) || spec.sampleCap < 4) {
    throw new ExtractionSpecError(
      "sampleCap must be an integer >= 4 (every class needs at least two samples)",
    );
  }
  if (!spec.outputDir) {
    throw new ExtractionSpecError("outputDir must be non-empty");
  }
}

export async function extract(spec: ExtractionSpec): Promise<ExtractionManifest> {
  validateSpec(spec);
  const dataset = loadDataset(
    spec.dataset,
    spec.sampleCap,
    spec.dataDir ?? ".",
    spec.seed ?? 0,
  );
  const perClass = new Map<number, number>();
  dataset.labels.forEach((l) => perClass.set(l, (perClass.get(l) ?? 0) + 1));
  for (const [cls, count] of perClass) {
    if (count < 2) {
      throw new ExtractionSpecError(
        `class ${cls} has only ${count} sample(s) under sampleCap=` +
          `${spec.sampleCap}; every class needs at least two`,
      );
    }
  }

  const capture = await loadModel(spec.model);
  const activations = captureActivations(
    capture,
    spec.layers,
    dataset.samples,
    dataset.sampleShape,
  );

  mkdirSync(spec.outputDir, { recursive: true });
  const manifest: ExtractionManifest = {
    model: capture.name,
    weightsChecksum: capture.weightsChecksum,
    dataset: dataset.name,
    numSamples: dataset.samples.length,
    numClasses: dataset.numClasses,
    layers: [],
    flattening: "row-major",
    preprocessing:
      dataset.name === "cifar10"
        ? "uint8 pixels scaled to [0,1], HWC row-major"
        : "raw synthetic features, no preprocessing",
  };
  for (const act of activations) {
    const file = `${act.layerName}.lfs`;
    writeLfs(join(spec.outputDir, file), {
      features: act.rows,
      labels: dataset.labels,
      numClasses: dataset.numClasses,
      metadata: JSON.stringify({
        model: capture.name,
        layer: act.layerName,
        shape: act.shape,
      }),
    });
    manifest.layers.push({ name: act.layerName, shape: act.shape, file });
  }
  const manifestPath = join(spec.outputDir, "manifest.json");
  const tmp = manifestPath + ".tmp";
  writeFileSync(tmp, JSON.stringify(manifest, null, 2) + "\n");
  renameSync(tmp, manifestPath);
  return manifest;
}
