import { describe, expect, it } from "vitest";
import { execFileSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { syntheticBlobs, DatasetError, loadCifar10 } from "../src/datasets.js";
import {
  buildSyntheticModel,
  captureActivations,
  ModelError,
  resolveLayers,
} from "../src/model.js";
import { extract, ExtractionSpecError, validateSpec } from "../src/extract.js";
import { readLfs } from "../src/lfs.js";

describe("synthetic dataset", () => {
  it("is deterministic for a fixed seed", () => {
    const a = syntheticBlobs(4, 10, 7);
    const b = syntheticBlobs(4, 10, 7);
    expect(Array.from(a.samples[3])).toEqual(Array.from(b.samples[3]));
    expect(Array.from(a.labels)).toEqual(Array.from(b.labels));
  });

  it("cifar10 loader gives retry guidance when the binaries are absent", () => {
    expect(() => loadCifar10("/nonexistent", 16)).toThrow(/cifar-10-binary/);
    expect(() => loadCifar10("/nonexistent", 16)).toThrow(DatasetError);
  });
});

describe("model layer capture", () => {
  it("lists available layers when a name cannot be resolved", () => {
    const { model } = buildSyntheticModel();
    expect(() => resolveLayers(model, ["nope"])).toThrow(
      /available layers: dense_1, dense_2, dense_3, dense_4/,
    );
    expect(() => resolveLayers(model, ["nope"])).toThrow(ModelError);
  });

  it("captures deterministic activations in inference mode", () => {
    const capture = buildSyntheticModel();
    const data = syntheticBlobs(4, 8, 1);
    const run = () =>
      captureActivations(capture, ["dense_1", "dense_3"], data.samples, [8]);
    const a = run();
    const b = run();
    expect(a[0].shape).toEqual([8]);
    expect(Array.from(a[1].rows[5])).toEqual(Array.from(b[1].rows[5]));
  });
});

describe("extraction spec validation", () => {
  const ok = {
    model: "synthetic",
    dataset: "synthetic",
    layers: ["dense_1"],
    sampleCap: 64,
    outputDir: "/tmp/x",
  };
  it("rejects empty layers, duplicate layers, and tiny caps", () => {
    expect(() => validateSpec({ ...ok, layers: [] })).toThrow(
      ExtractionSpecError,
    );
    expect(() =>
      validateSpec({ ...ok, layers: ["dense_1", "dense_1"] }),
    ).toThrow(/unique/);
    expect(() => validateSpec({ ...ok, sampleCap: 3 })).toThrow(
      /at least two/,
    );
  });
});

describe("end-to-end synthetic extraction", () => {
  it("writes one feature set per layer plus a manifest", async () => {
    const dir = mkdtempSync(join(tmpdir(), "extract-"));
    const manifest = await extract({
      model: "synthetic",
      dataset: "synthetic",
      layers: ["dense_1", "dense_2", "dense_3", "dense_4"],
      sampleCap: 128,
      outputDir: dir,
    });
    expect(manifest.layers.map((l) => l.name)).toEqual([
      "dense_1",
      "dense_2",
      "dense_3",
      "dense_4",
    ]);
    expect(manifest.weightsChecksum).toMatch(/^[0-9a-f]{64}$/);
    expect(manifest.flattening).toBe("row-major");
    for (const layer of manifest.layers) {
      const set = readLfs(join(dir, layer.file));
      expect(set.features.length).toBe(manifest.numSamples);
      expect(set.numClasses).toBe(4);
    }
    expect(existsSync(join(dir, "manifest.json"))).toBe(true);
    const onDisk = JSON.parse(readFileSync(join(dir, "manifest.json"), "utf8"));
    expect(onDisk.model).toBe("synthetic");
  });

  it("feature sets cross-read in the Python analysis library", async () => {
    const dir = mkdtempSync(join(tmpdir(), "extract-py-"));
    await extract({
      model: "synthetic",
      dataset: "synthetic",
      layers: ["dense_2"],
      sampleCap: 64,
      outputDir: dir,
    });
    const script = [
      "from rdmlab import load_feature_set",
      `s = load_feature_set(${JSON.stringify(join(dir, "dense_2.lfs"))})`,
      "print(s.features.shape, s.num_classes)",
    ].join("\n");
    const out = execFileSync("python3", ["-c", script], { encoding: "utf8" });
    expect(out.trim()).toBe("(64, 8) 4");
  });
});
