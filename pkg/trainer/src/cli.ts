#!/usr/bin/env node
/** Command line: train a predictor on a toy dataset directory, or run a
 * trained checkpoint over images to produce SDT dense maps. */

import { TRAIN_DEFAULTS, TrainConfig, train } from "./train";
import { predict } from "./predict";

interface FlagSpec {
  [name: string]: { value?: string; required?: boolean; help: string };
}

function parseFlags(argv: string[], spec: FlagSpec, command: string): Map<string, string> {
  const out = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const name = argv[i];
    if (name === "--help" || name === "-h") {
      usage(command, spec);
      process.exit(0);
    }
    if (!name.startsWith("--") || !(name.slice(2) in spec)) {
      fail(`unknown flag ${name} for '${command}'`);
    }
    if (i + 1 >= argv.length) fail(`flag ${name} needs a value`);
    out.set(name.slice(2), argv[i + 1]);
  }
  for (const [name, f] of Object.entries(spec)) {
    if (f.required && !out.has(name)) fail(`'${command}' requires --${name}`);
    if (!out.has(name) && f.value !== undefined) out.set(name, f.value);
  }
  return out;
}

function usage(command: string, spec: FlagSpec): void {
  console.log(`usage: starpoly-trainer ${command} [flags]`);
  for (const [name, f] of Object.entries(spec)) {
    const tag = f.required ? "(required)" : `(default ${f.value})`;
    console.log(`  --${name.padEnd(8)} ${f.help} ${tag}`);
  }
}

function fail(message: string): never {
  console.error(`starpoly-trainer: ${message}`);
  process.exit(2);
}

const TRAIN_FLAGS: FlagSpec = {
  data: { required: true, help: "dataset directory with images/ and maps/" },
  out: { required: true, help: "checkpoint file to write" },
  rays: { value: String(TRAIN_DEFAULTS.rays), help: "radial directions (must match the maps)" },
  epochs: { value: String(TRAIN_DEFAULTS.epochs), help: "passes over the training split" },
  batch: { value: String(TRAIN_DEFAULTS.batchSize), help: "crops per optimization step" },
  crop: { value: String(TRAIN_DEFAULTS.cropSize), help: "square crop size (<= image size)" },
  lambda: { value: String(TRAIN_DEFAULTS.lambda), help: "weight of the distance loss term" },
  lr: { value: String(TRAIN_DEFAULTS.learningRate), help: "Adam learning rate" },
  "lr-decay": { value: String(TRAIN_DEFAULTS.lrDecay), help: "per-epoch learning-rate factor" },
  seed: { value: String(TRAIN_DEFAULTS.seed), help: "weight init / shuffling seed" },
  widths: { value: TRAIN_DEFAULTS.widths.join(","), help: "encoder widths per level" },
};

const PREDICT_FLAGS: FlagSpec = {
  ckpt: { required: true, help: "checkpoint file from 'train'" },
  images: { required: true, help: "directory of input PNG images" },
  out: { required: true, help: "directory for SDT dense-map outputs" },
  rays: { value: "", help: "expected radial directions (error if checkpoint differs)" },
};

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2);
  if (command === "train") {
    const flags = parseFlags(rest, TRAIN_FLAGS, "train");
    const config: TrainConfig = {
      dataDir: flags.get("data")!,
      rays: parseInt(flags.get("rays")!, 10),
      epochs: parseInt(flags.get("epochs")!, 10),
      batchSize: parseInt(flags.get("batch")!, 10),
      cropSize: parseInt(flags.get("crop")!, 10),
      lambda: parseFloat(flags.get("lambda")!),
      learningRate: parseFloat(flags.get("lr")!),
      lrDecay: parseFloat(flags.get("lr-decay")!),
      seed: parseInt(flags.get("seed")!, 10),
      widths: flags.get("widths")!.split(",").map((v) => parseInt(v, 10)),
    };
    const result = await train(config, flags.get("out")!, console.log);
    console.log(
      `train: ${result.epochLosses.length} epochs on ${result.trainImages} images, ` +
        `final loss ${result.epochLosses[result.epochLosses.length - 1].toFixed(5)}, ` +
        `checkpoint ${flags.get("out")}`
    );
    return 0;
  }
  if (command === "predict") {
    const flags = parseFlags(rest, PREDICT_FLAGS, "predict");
    const expected = flags.get("rays") ? parseInt(flags.get("rays")!, 10) : undefined;
    const result = await predict(
      flags.get("ckpt")!,
      flags.get("images")!,
      flags.get("out")!,
      expected
    );
    console.log(`predict: wrote ${result.files.length} SDT files (${result.rays} rays)`);
    return 0;
  }
  if (command === "--help" || command === "-h" || command === undefined) {
    console.log("usage: starpoly-trainer <train|predict> [flags]   (--help per command)");
    return command === undefined ? 2 : 0;
  }
  fail(`unknown command '${command}'`);
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(`starpoly-trainer: ${err.message}`);
    process.exit(1);
  }
);
