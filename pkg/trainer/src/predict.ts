/** Inference: load a checkpoint, run every image in a directory through the
 * network, and write one SDT dense-maps file per image for the decoder. */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";

import { initBackend } from "./backend";
import { loadCheckpoint } from "./checkpoint";
import { readGrayPng } from "./png";
import { ModelSpec, disposeVars, forward } from "./model";
import { writeSdt } from "./sdt";

function padTo(value: number, multiple: number): number {
  return Math.ceil(value / multiple) * multiple;
}

export interface PredictResult {
  files: string[];
  rays: number;
}

export async function predict(
  checkpointPath: string,
  imagesDir: string,
  outDir: string,
  expectedRays?: number,
  log: (line: string) => void = () => {}
): Promise<PredictResult> {
  await initBackend();
  const { meta, vars } = loadCheckpoint(checkpointPath);
  if (expectedRays !== undefined && expectedRays !== meta.rays) {
    disposeVars(vars);
    throw new Error(
      `rays mismatch: checkpoint was trained with ${meta.rays} radial ` +
        `directions but ${expectedRays} were requested`
    );
  }
  const spec: ModelSpec = { rays: meta.rays, widths: meta.widths };
  const names = fs
    .readdirSync(imagesDir)
    .filter((f) => f.endsWith(".png"))
    .sort();
  if (names.length === 0) {
    disposeVars(vars);
    throw new Error(`no PNG images in ${imagesDir}`);
  }
  fs.mkdirSync(outDir, { recursive: true });
  const stride = 2 ** spec.widths.length;
  const written: string[] = [];
  for (const name of names) {
    const img = readGrayPng(path.join(imagesDir, name));
    const hp = padTo(img.height, stride);
    const wp = padTo(img.width, stride);
    const out = tf.tidy(() => {
      let x = tf.tensor4d(img.data, [1, img.height, img.width, 1]);
      if (hp !== img.height || wp !== img.width) {
        x = tf.pad(x, [[0, 0], [0, hp - img.height], [0, wp - img.width], [0, 0]]);
      }
      const [prob, dist] = forward(x, vars, spec);
      // stack to (1+n, H, W); distances clamped at 0 to satisfy the format
      const planes = tf.concat([prob, tf.maximum(dist, 0)], 3);
      return planes
        .slice([0, 0, 0, 0], [1, img.height, img.width, 1 + meta.rays])
        .squeeze([0])
        .transpose([2, 0, 1]);
    });
    const data = out.dataSync() as Float32Array;
    out.dispose();
    const target = path.join(outDir, name.replace(/\.png$/, ".sdt"));
    writeSdt(target, [1 + meta.rays, img.height, img.width], data);
    written.push(target);
    log(`wrote ${target}`);
  }
  disposeVars(vars);
  return { files: written, rays: meta.rays };
}
