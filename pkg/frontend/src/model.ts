/**
 * Model loading and per-layer activation capture on top of TensorFlow.js.
 *
 * Two model families are supported:
 *  - "synthetic": a small deterministic dense stack built in-process with
 *    weights chosen so that class-aligned signal persists through depth while
 *    nuisance coordinates are attenuated. Useful for end-to-end pipeline
 *    tests without any network access.
 *  - a URL or file path pointing at a tf.js LayersModel (model.json), e.g. a
 *    converted image classifier. Loading requires the weights to be
 *    reachable; a failure is fatal with retry guidance.
 */

import * as tf from "@tensorflow/tfjs";
import { createHash } from "node:crypto";

export class ModelError extends Error {}

export interface CaptureModel {
  name: string;
  model: tf.LayersModel;
  /** Hex SHA-256 over all weight buffers, in layer order. */
  weightsChecksum: string;
  inputShape: number[];
}

export function weightsChecksum(model: tf.LayersModel): string {
  const hash = createHash("sha256");
  for (const w of model.getWeights()) {
    const data = w.dataSync() as Float32Array;
    hash.update(Buffer.from(data.buffer, data.byteOffset, data.byteLength));
  }
  return hash.digest("hex");
}

/**
 * Builds the deterministic synthetic model: four dense layers of width 8
 * over an 8-dimensional input. Weights amplify the first three coordinates
 * (where the synthetic blob classes separate) and shrink the rest, so class
 * separability grows strictly with depth. No randomness, no I/O.
 */
export function buildSyntheticModel(): CaptureModel {
  const dim = 8;
  const layers: tf.layers.Layer[] = [];
  const model = tf.sequential({ name: "synthetic" });
  for (let depth = 0; depth < 4; depth++) {
    model.add(
      tf.layers.dense({
        name: `dense_${depth + 1}`,
        units: dim,
        activation: "linear",
        useBias: false,
        inputShape: depth === 0 ? [dim] : undefined,
      }),
    );
  }
  // Diagonal weights: gain 1.5 on signal coordinates, 0.5 on nuisance ones.
  const diag = new Float32Array(dim * dim);
  for (let j = 0; j < dim; j++) {
    diag[j * dim + j] = j < 3 ? 1.5 : 0.5;
  }
  const w = tf.tensor2d(diag, [dim, dim]);
  for (const layer of model.layers) {
    layer.setWeights([w]);
  }
  void layers;
  return {
    name: "synthetic",
    model,
    weightsChecksum: weightsChecksum(model),
    inputShape: [dim],
  };
}

export async function loadModel(spec: string): Promise<CaptureModel> {
  if (spec === "synthetic") {
    return buildSyntheticModel();
  }
  let model: tf.LayersModel;
  try {
    const url = /^[a-z]+:\/\//.test(spec) ? spec : `file://${spec}`;
    model = await tf.loadLayersModel(url);
  } catch (err) {
    throw new ModelError(
      `failed to load model from ${spec}: ${(err as Error).message}. ` +
        "If this was a network fetch, the weights host may be unreachable " +
        "from this environment; download model.json and its weight shards " +
        "manually, place them on local disk, and pass the local path.",
    );
  }
  const input = model.inputs[0].shape.slice(1).map((d) => d ?? -1);
  return {
    name: spec,
    model,
    weightsChecksum: weightsChecksum(model),
    inputShape: input,
  };
}

export function layerNames(model: tf.LayersModel): string[] {
  return model.layers.map((l) => l.name);
}

/** Resolves layer names, failing with the list of available names. */
export function resolveLayers(
  model: tf.LayersModel,
  names: string[],
): tf.layers.Layer[] {
  const available = layerNames(model);
  return names.map((name) => {
    if (!available.includes(name)) {
      throw new ModelError(
        `layer ${JSON.stringify(name)} not found; available layers: ` +
          available.join(", "),
      );
    }
    return model.getLayer(name);
  });
}

export interface LayerActivations {
  layerName: string;
  /** Per-sample activations flattened row-major. */
  rows: Float32Array[];
  /** Activation shape of one sample at this layer (batch dim dropped). */
  shape: number[];
}

/**
 * Runs the model in inference mode and captures activations at the named
 * layers. Batched; deterministic for fixed inputs and weights.
 */
export function captureActivations(
  capture: CaptureModel,
  layers: string[],
  samples: Float32Array[],
  sampleShape: number[],
  batchSize = 256,
): LayerActivations[] {
  const resolved = resolveLayers(capture.model, layers);
  const tap = tf.model({
    inputs: capture.model.inputs,
    outputs: resolved.map((l) => l.output as tf.SymbolicTensor),
  });
  const results: LayerActivations[] = layers.map((name) => ({
    layerName: name,
    rows: [],
    shape: [],
  }));
  for (let start = 0; start < samples.length; start += batchSize) {
    const chunk = samples.slice(start, start + batchSize);
    const flat = new Float32Array(chunk.length * chunk[0].length);
    chunk.forEach((row, i) => flat.set(row, i * row.length));
    const out = tf.tidy(() => {
      const x = tf.tensor(flat, [chunk.length, ...sampleShape]);
      const ys = tap.predict(x, { batchSize: chunk.length });
      return Array.isArray(ys) ? ys : [ys];
    });
    out.forEach((y, li) => {
      const shape = y.shape.slice(1);
      const width = shape.reduce((a, b) => a * b, 1);
      const data = y.dataSync() as Float32Array;
      for (let i = 0; i < chunk.length; i++) {
        results[li].rows.push(data.slice(i * width, (i + 1) * width));
      }
      results[li].shape = shape;
      y.dispose();
    });
  }
  return results;
}
