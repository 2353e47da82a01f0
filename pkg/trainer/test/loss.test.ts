import * as tf from "@tensorflow/tfjs";
import { beforeAll, describe, expect, it } from "vitest";

import { initBackend } from "../src/backend";
import { bce, totalLoss, weightedMae } from "../src/loss";

beforeAll(async () => {
  await initBackend();
});

function randomTensors(seed: number) {
  const predProb = tf.randomUniform([2, 4, 4, 1], 0.05, 0.95, "float32", seed);
  const predDist = tf.randomUniform([2, 4, 4, 3], -2, 8, "float32", seed + 1);
  const gtProb = tf.randomUniform([2, 4, 4, 1], 0, 1, "float32", seed + 2);
  const gtDist = tf.randomUniform([2, 4, 4, 3], 0, 8, "float32", seed + 3);
  return { predProb, predDist, gtProb, gtDist };
}

describe("distance term", () => {
  it("vanishes when the ground-truth probability is zero everywhere", () => {
    const zeros = tf.zeros([1, 4, 4, 1]);
    const wild = tf.randomUniform([1, 4, 4, 5], -100, 100, "float32", 3);
    const gt = tf.zeros([1, 4, 4, 5]);
    expect(weightedMae(wild, gt, zeros).dataSync()[0]).toBe(0);
  });

  it("ignores predictions at zero-probability pixels", () => {
    const gtProb = tf.tensor4d([1, 0, 0, 1], [1, 2, 2, 1]);
    const gtDist = tf.ones([1, 2, 2, 2]);
    const base = tf.ones([1, 2, 2, 2]);
    const spiked = tf.tensor4d(
      [1, 1, 999, -999, 777, 777, 1, 1], [1, 2, 2, 2]
    );
    const a = weightedMae(base, gtDist, gtProb).dataSync()[0];
    const b = weightedMae(spiked, gtDist, gtProb).dataSync()[0];
    expect(b).toBe(a);
  });

  it("is zero for a perfect prediction and bce sits at its floor", () => {
    const { gtProb, gtDist } = randomTensors(11);
    expect(weightedMae(gtDist, gtDist, gtProb).dataSync()[0]).toBe(0);
    const floor = bce(gtProb, gtProb).dataSync()[0];
    const worse = bce(tf.fill([2, 4, 4, 1], 0.5), gtProb).dataSync()[0];
    expect(floor).toBeLessThanOrEqual(worse);
  });

  it("scales linearly in the weight", () => {
    const { predProb, predDist, gtProb, gtDist } = randomTensors(21);
    const l1 = totalLoss(predProb, predDist, gtProb, gtDist, 0.2).dataSync()[0];
    const l2 = totalLoss(predProb, predDist, gtProb, gtDist, 0.4).dataSync()[0];
    const bceOnly = bce(predProb, gtProb).dataSync()[0];
    const distTerm1 = l1 - bceOnly;
    const distTerm2 = l2 - bceOnly;
    expect(distTerm2).toBeCloseTo(2 * distTerm1, 5);
  });
});

/** Double-precision reimplementation of the loss formula, used as the
 * finite-difference oracle (a float32 forward pass is too noisy for
 * 1e-4-level difference quotients). */
function lossOracle(
  predProb: number[], predDist: number[], gtProb: number[], gtDist: number[],
  lambda: number
): number {
  const eps = 1e-7;
  let bceSum = 0;
  for (let i = 0; i < predProb.length; i++) {
    const p = Math.min(Math.max(predProb[i], eps), 1 - eps);
    bceSum -= gtProb[i] * Math.log(p) + (1 - gtProb[i]) * Math.log(1 - p);
  }
  const n = predDist.length / predProb.length;
  let maeSum = 0;
  for (let i = 0; i < predProb.length; i++) {
    for (let c = 0; c < n; c++) {
      maeSum += gtProb[i] * Math.abs(predDist[i * n + c] - gtDist[i * n + c]);
    }
  }
  return bceSum / predProb.length + (lambda * maeSum) / predDist.length;
}

describe("gradients", () => {
  it("match central finite differences within 1e-4 relative error", async () => {
    const px = 9; // 3x3 image
    const n = 2;
    const rng = (seed: number) =>
      Array.from(tf.randomUniform([px], 0, 1, "float32", seed).dataSync());
    // round everything to float32 so the double-precision oracle evaluates
    // at exactly the points the tensors hold
    const f32 = (xs: number[]) => Array.from(new Float32Array(xs));
    const gtProbA = f32(rng(5).map((v) => 0.1 + 0.8 * v));
    const gtDistA = f32(rng(6).concat(rng(16)).map((v) => 5 * v));
    const probA = f32(rng(7).map((v) => 0.2 + 0.6 * v));
    // keep |pred - gt| >= 0.5 so the difference quotient never crosses the
    // absolute-value kink
    const distA = f32(
      gtDistA.map((v, i) => v + (i % 2 === 0 ? 1 : -1) * (0.5 + rng(8)[i % px]))
    );

    const probT = tf.tensor4d(probA, [1, 3, 3, 1]);
    const distT = tf.tensor4d(distA, [1, 3, 3, n]);
    const gtProbT = tf.tensor4d(gtProbA, [1, 3, 3, 1]);
    const gtDistT = tf.tensor4d(gtDistA, [1, 3, 3, n]);
    const grads = tf.grads((p: tf.Tensor, d: tf.Tensor) =>
      totalLoss(p, d, gtProbT, gtDistT, 0.2)
    )([probT, distT]);
    const gp = (await grads[0].data()) as Float32Array;
    const gd = (await grads[1].data()) as Float32Array;

    const eps = 1e-5;
    const fdProb = probA.map((_, idx) => {
      const plus = [...probA]; plus[idx] += eps;
      const minus = [...probA]; minus[idx] -= eps;
      return (
        (lossOracle(plus, distA, gtProbA, gtDistA, 0.2) -
          lossOracle(minus, distA, gtProbA, gtDistA, 0.2)) / (2 * eps)
      );
    });
    const fdDist = distA.map((_, idx) => {
      const plus = [...distA]; plus[idx] += eps;
      const minus = [...distA]; minus[idx] -= eps;
      return (
        (lossOracle(probA, plus, gtProbA, gtDistA, 0.2) -
          lossOracle(probA, minus, gtProbA, gtDistA, 0.2)) / (2 * eps)
      );
    });

    const checkAll = (got: Float32Array, want: number[]) => {
      const scale = Math.max(...want.map(Math.abs));
      want.forEach((fd, idx) => {
        const rel = Math.abs(got[idx] - fd) / Math.max(Math.abs(fd), 1e-3 * scale);
        expect(rel).toBeLessThan(1e-4);
      });
    };
    checkAll(gp, fdProb);
    checkAll(gd, fdDist);
  });
});
