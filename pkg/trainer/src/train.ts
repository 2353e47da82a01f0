/** Training loop: random crops with axis-aligned rotation/flip augmentation,
 * Adam on the combined probability/distance loss, checkpoint at the end. */

import * as tf from "@tensorflow/tfjs";

import { initBackend } from "./backend";
import { saveCheckpoint } from "./checkpoint";
import { Sample, loadDataset, randomAugment, randomCrop, trainTestSplit } from "./data";
import { totalLoss } from "./loss";
import { ModelSpec, buildVars, disposeVars, forward } from "./model";
import { Rng } from "./rng";

export interface TrainConfig {
  dataDir: string;
  rays: number;
  epochs: number;
  batchSize: number;
  cropSize: number;
  lambda: number; // weight of the distance term
  learningRate: number;
  lrDecay: number; // learning-rate factor applied after each epoch
  seed: number;
  widths: number[];
}

export const TRAIN_DEFAULTS = {
  rays: 32,
  epochs: 10,
  batchSize: 4,
  cropSize: 256,
  lambda: 0.2,
  learningRate: 2e-3,
  lrDecay: 0.8,
  seed: 0,
  widths: [8, 16],
};

export interface TrainResult {
  epochLosses: number[];
  trainImages: number;
}

function toBatch(samples: Sample[], rays: number) {
  const b = samples.length;
  const s = samples[0].height;
  const x = new Float32Array(b * s * s);
  const gtP = new Float32Array(b * s * s);
  const gtD = new Float32Array(b * s * s * rays);
  samples.forEach((sample, t) => {
    x.set(sample.image, t * s * s);
    gtP.set(sample.prob, t * s * s);
    // plane-major (n, H, W) -> channels-last (H, W, n)
    const base = t * s * s * rays;
    for (let c = 0; c < rays; c++) {
      const plane = sample.dist.subarray(c * s * s, (c + 1) * s * s);
      for (let p = 0; p < s * s; p++) {
        gtD[base + p * rays + c] = plane[p];
      }
    }
  });
  return {
    x: tf.tensor4d(x, [b, s, s, 1]),
    gtP: tf.tensor4d(gtP, [b, s, s, 1]),
    gtD: tf.tensor4d(gtD, [b, s, s, rays]),
  };
}

export async function train(
  config: TrainConfig,
  checkpointPath: string,
  log: (line: string) => void = () => {}
): Promise<TrainResult> {
  await initBackend();
  if (config.rays < 3) throw new Error(`rays must be >= 3, got ${config.rays}`);
  const all = loadDataset(config.dataDir);
  const badRays = all.find((s) => s.rays !== config.rays);
  if (badRays) {
    throw new Error(
      `rays mismatch: dataset maps carry ${badRays.rays} distance planes, ` +
        `config asks for ${config.rays} (re-encode or change --rays)`
    );
  }
  const tooSmall = all.find((s) => config.cropSize > Math.min(s.height, s.width));
  if (tooSmall) {
    throw new Error(
      `crop size ${config.cropSize} exceeds image size ` +
        `${tooSmall.height}x${tooSmall.width}`
    );
  }
  const { train: trainSet } = trainTestSplit(all);
  log(`training on ${trainSet.length} of ${all.length} images (90/10 split by index)`);

  const spec: ModelSpec = { rays: config.rays, widths: config.widths };
  const vars = buildVars(spec, config.seed);
  const varList = Object.values(vars);
  const opt = tf.train.adam(config.learningRate);
  const rng = new Rng(config.seed ^ 0x5f3759df);

  const epochLosses: number[] = [];
  for (let epoch = 0; epoch < config.epochs; epoch++) {
    (opt as unknown as { learningRate: number }).learningRate =
      config.learningRate * config.lrDecay ** epoch;
    const order = rng.shuffle([...trainSet.keys()]);
    let lossSum = 0;
    let steps = 0;
    for (let at = 0; at < order.length; at += config.batchSize) {
      const batchIdx = order.slice(at, at + config.batchSize);
      const crops = batchIdx.map((t) =>
        randomCrop(randomAugment(trainSet[t], rng), config.cropSize, rng)
      );
      const { x, gtP, gtD } = toBatch(crops, config.rays);
      const lossVal = opt.minimize(
        () =>
          tf.tidy(() => {
            const [p, d] = forward(x, vars, spec);
            return totalLoss(p, d, gtP, gtD, config.lambda);
          }),
        true,
        varList
      ) as tf.Scalar;
      lossSum += (await lossVal.data())[0];
      steps += 1;
      lossVal.dispose();
      x.dispose();
      gtP.dispose();
      gtD.dispose();
    }
    epochLosses.push(lossSum / steps);
    log(`epoch ${epoch + 1}/${config.epochs}: mean loss ${epochLosses[epoch].toFixed(5)}`);
  }

  saveCheckpoint(
    checkpointPath,
    {
      rays: config.rays,
      widths: config.widths,
      seed: config.seed,
      cropSize: config.cropSize,
      epochs: config.epochs,
      lambda: config.lambda,
      epochLosses,
    },
    vars
  );
  disposeVars(vars);
  opt.dispose();
  return { epochLosses, trainImages: trainSet.length };
}
