/** A small convolutional encoder-decoder with skip connections.
 *
 * Two down/up levels, a shared 3x3 feature layer with 128 channels and relu,
 * then two heads: a single-channel 1x1 convolution with sigmoid for the
 * object probability, and an n-channel 1x1 convolution with no activation
 * for the radial distances.
 *
 * Convolutions run through a custom gradient: the wasm backend has fast
 * forward and input-gradient kernels but no filter-gradient kernel, so the
 * filter gradient is assembled as one im2col matMul instead.
 */

import * as tf from "@tensorflow/tfjs";

export interface ModelVars {
  [name: string]: tf.Variable;
}

export interface ModelSpec {
  rays: number;
  widths: number[]; // encoder widths, one per down/up level
}

const convForward = (x: tf.Tensor4D, w: tf.Tensor4D) => tf.conv2d(x, w, 1, "same");

const conv2dTrainable = tf.customGrad((...args: unknown[]) => {
  const [x, w, save] = args as [tf.Tensor4D, tf.Tensor4D, tf.GradSaveFunc];
  save([x, w]);
  return {
    value: convForward(x, w),
    gradFunc: (dy: tf.Tensor4D, saved: tf.Tensor[]) => {
      const [xs, ws] = saved as [tf.Tensor4D, tf.Tensor4D];
      const [b, h, wd, c] = xs.shape;
      const f = ws.shape[3];
      const dx = tf.conv2dTranspose(dy, ws, xs.shape, 1, "same");
      const xp = tf.pad(xs, [[0, 0], [1, 1], [1, 1], [0, 0]]);
      const cols: tf.Tensor4D[] = [];
      for (let di = 0; di < 3; di++) {
        for (let dj = 0; dj < 3; dj++) {
          cols.push(tf.slice(xp, [0, di, dj, 0], [b, h, wd, c]));
        }
      }
      const im = tf.concat(cols, 3).reshape([b * h * wd, 9 * c]);
      const dw = tf
        .matMul(im, dy.reshape([b * h * wd, f]), true, false)
        .reshape([3, 3, c, f]);
      return [dx, dw];
    },
  };
});

function conv3x3(x: tf.Tensor4D, w: tf.Variable, bias: tf.Variable, relu: boolean): tf.Tensor4D {
  let out = (conv2dTrainable(x, w) as tf.Tensor4D).add(bias);
  if (relu) out = tf.relu(out);
  return out as tf.Tensor4D;
}

function conv1x1(x: tf.Tensor4D, w: tf.Variable, bias: tf.Variable): tf.Tensor4D {
  const [b, h, wd, c] = x.shape;
  return x
    .reshape([b * h * wd, c])
    .matMul(w as unknown as tf.Tensor2D)
    .add(bias)
    .reshape([b, h, wd, (w.shape as number[])[1]]);
}

/** Variable layout, deterministic given the seed (He-normal weights). */
export function buildVars(spec: ModelSpec, seed: number): ModelVars {
  const vars: ModelVars = {};
  let next = seed;
  const weight = (name: string, shape: number[], fanIn: number): void => {
    vars[name] = tf.variable(
      tf.randomNormal(shape, 0, Math.sqrt(2 / fanIn), "float32", next++)
    );
  };
  const bias = (name: string, size: number): void => {
    vars[name] = tf.variable(tf.zeros([size]));
  };
  const { rays, widths } = spec;
  let cin = 1;
  widths.forEach((w, i) => {
    weight(`down${i}a_w`, [3, 3, cin, w], 9 * cin);
    bias(`down${i}a_b`, w);
    weight(`down${i}b_w`, [3, 3, w, w], 9 * w);
    bias(`down${i}b_b`, w);
    cin = w;
  });
  const mid = widths[widths.length - 1] * 2;
  weight("mid_a_w", [3, 3, cin, mid], 9 * cin);
  bias("mid_a_b", mid);
  weight("mid_b_w", [3, 3, mid, mid], 9 * mid);
  bias("mid_b_b", mid);
  cin = mid;
  for (let i = widths.length - 1; i >= 0; i--) {
    const w = widths[i];
    weight(`up${i}a_w`, [3, 3, cin + w, w], 9 * (cin + w));
    bias(`up${i}a_b`, w);
    weight(`up${i}b_w`, [3, 3, w, w], 9 * w);
    bias(`up${i}b_b`, w);
    cin = w;
  }
  weight("feat_w", [3, 3, cin, 128], 9 * cin);
  bias("feat_b", 128);
  weight("prob_w", [128, 1], 128);
  bias("prob_b", 1);
  weight("dist_w", [128, rays], 128);
  // start the distance head at a typical object radius so early polygons
  // have a sensible scale instead of collapsing to points
  vars.dist_b = tf.variable(tf.fill([rays], 8.0));
  return vars;
}

/** Forward pass; input (B, H, W, 1) with H, W divisible by 2^levels.
 * Returns [prob (B, H, W, 1) in (0, 1), dist (B, H, W, rays) unbounded]. */
export function forward(
  x: tf.Tensor4D,
  vars: ModelVars,
  spec: ModelSpec
): [tf.Tensor4D, tf.Tensor4D] {
  const { widths } = spec;
  const skips: tf.Tensor4D[] = [];
  let h = x;
  widths.forEach((w, i) => {
    h = conv3x3(h, vars[`down${i}a_w`], vars[`down${i}a_b`], true);
    h = conv3x3(h, vars[`down${i}b_w`], vars[`down${i}b_b`], true);
    skips.push(h);
    h = tf.maxPool(h, 2, 2, "same");
  });
  h = conv3x3(h, vars.mid_a_w, vars.mid_a_b, true);
  h = conv3x3(h, vars.mid_b_w, vars.mid_b_b, true);
  for (let i = widths.length - 1; i >= 0; i--) {
    const [, hh, ww] = h.shape;
    h = tf.image.resizeNearestNeighbor(h as tf.Tensor4D, [2 * hh, 2 * ww]);
    h = tf.concat([h, skips[i]], 3);
    h = conv3x3(h, vars[`up${i}a_w`], vars[`up${i}a_b`], true);
    h = conv3x3(h, vars[`up${i}b_w`], vars[`up${i}b_b`], true);
  }
  h = conv3x3(h, vars.feat_w, vars.feat_b, true);
  const prob = tf.sigmoid(conv1x1(h, vars.prob_w, vars.prob_b)) as tf.Tensor4D;
  const dist = conv1x1(h, vars.dist_w, vars.dist_b);
  return [prob, dist];
}

export function disposeVars(vars: ModelVars): void {
  for (const v of Object.values(vars)) v.dispose();
}

/** Canonical variable order for checkpoint serialization. */
export function varNames(spec: ModelSpec): string[] {
  return Object.keys(buildVarsShapeOnly(spec));
}

function buildVarsShapeOnly(spec: ModelSpec): Record<string, number[]> {
  const shapes: Record<string, number[]> = {};
  const { rays, widths } = spec;
  let cin = 1;
  widths.forEach((w, i) => {
    shapes[`down${i}a_w`] = [3, 3, cin, w];
    shapes[`down${i}a_b`] = [w];
    shapes[`down${i}b_w`] = [3, 3, w, w];
    shapes[`down${i}b_b`] = [w];
    cin = w;
  });
  const mid = widths[widths.length - 1] * 2;
  shapes.mid_a_w = [3, 3, cin, mid];
  shapes.mid_a_b = [mid];
  shapes.mid_b_w = [3, 3, mid, mid];
  shapes.mid_b_b = [mid];
  cin = mid;
  for (let i = widths.length - 1; i >= 0; i--) {
    const w = widths[i];
    shapes[`up${i}a_w`] = [3, 3, cin + w, w];
    shapes[`up${i}a_b`] = [w];
    shapes[`up${i}b_w`] = [3, 3, w, w];
    shapes[`up${i}b_b`] = [w];
    cin = w;
  }
  shapes.feat_w = [3, 3, cin, 128];
  shapes.feat_b = [128];
  shapes.prob_w = [128, 1];
  shapes.prob_b = [1];
  shapes.dist_w = [128, rays];
  shapes.dist_b = [rays];
  return shapes;
}

export { buildVarsShapeOnly };
