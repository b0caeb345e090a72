#!/usr/bin/env node
/** Command-line entry point for the feature extractor. */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { extract, ExtractionSpecError } from "./extract.js";
import { DatasetError } from "./datasets.js";
import { ModelError } from "./model.js";

async function main(): Promise<void> {
  const argv = await yargs(hideBin(process.argv))
    .scriptName("feature-extract")
    .usage("$0 --model <name> --dataset <name> --layers a,b,c --out-dir DIR")
    .option("model", {
      type: "string",
      demandOption: true,
      describe: '"synthetic" or a path/URL to a tf.js LayersModel',
    })
    .option("dataset", {
      type: "string",
      demandOption: true,
      choices: ["synthetic", "cifar10"],
    })
    .option("layers", {
      type: "string",
      demandOption: true,
      describe: "comma-separated layer names, shallow to deep",
    })
    .option("sample-cap", { type: "number", default: 512 })
    .option("out-dir", { type: "string", demandOption: true })
    .option("data-dir", {
      type: "string",
      default: ".",
      describe: "directory holding dataset binaries (cifar10)",
    })
    .option("seed", { type: "number", default: 0 })
    .strict()
    .help()
    .parse();

  try {
    const manifest = await extract({
      model: argv.model,
      dataset: argv.dataset as string,
      layers: argv.layers.split(",").map((s) => s.trim()).filter(Boolean),
      sampleCap: argv["sample-cap"],
      outputDir: argv["out-dir"],
      dataDir: argv["data-dir"],
      seed: argv.seed,
    });
    process.stdout.write(JSON.stringify(manifest, null, 2) + "\n");
  } catch (err) {
    if (
      err instanceof ExtractionSpecError ||
      err instanceof DatasetError ||
      err instanceof ModelError
    ) {
      process.stderr.write(`error: ${err.message}\n`);
      process.exit(err instanceof ExtractionSpecError ? 2 : 3);
    }
    throw err;
  }
}

void main();
