/** Training losses.
 *
 * The probability head gets a standard binary cross-entropy. The distance
 * head gets a mean absolute error weighted per pixel by the ground-truth
 * object probability, so background pixels (probability 0) contribute
 * nothing and pixels near object centers count the most.
 */

import * as tf from "@tensorflow/tfjs";

const EPS = 1e-7;

export function bce(predProb: tf.Tensor, gtProb: tf.Tensor): tf.Scalar {
  return tf.tidy(() => {
    const p = predProb.clipByValue(EPS, 1 - EPS);
    const one = tf.scalar(1);
    const term = gtProb.mul(p.log()).add(one.sub(gtProb).mul(one.sub(p).log()));
    return tf.neg(tf.mean(term)) as tf.Scalar;
  });
}

export function weightedMae(
  predDist: tf.Tensor,
  gtDist: tf.Tensor,
  gtProb: tf.Tensor
): tf.Scalar {
  return tf.tidy(
    () => tf.mean(gtProb.mul(predDist.sub(gtDist).abs())) as tf.Scalar
  );
}

export function totalLoss(
  predProb: tf.Tensor,
  predDist: tf.Tensor,
  gtProb: tf.Tensor,
  gtDist: tf.Tensor,
  lambda: number
): tf.Scalar {
  return tf.tidy(() =>
    bce(predProb, gtProb).add(
      weightedMae(predDist, gtDist, gtProb).mul(lambda)
    ) as tf.Scalar
  );
}
