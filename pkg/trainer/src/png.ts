/** Grayscale PNG reading for dataset images (8-bit intensity in [0, 1]). */

import * as fs from "fs";
import { PNG } from "pngjs";

export interface GrayImage {
  height: number;
  width: number;
  data: Float32Array; // row-major, values in [0, 1]
}

export function readGrayPng(path: string): GrayImage {
  const png = PNG.sync.read(fs.readFileSync(path));
  const { width, height, data } = png;
  const out = new Float32Array(width * height);
  // pngjs expands every mode to 8-bit RGBA; grayscale lands in R=G=B
  for (let p = 0; p < width * height; p++) {
    out[p] = data[4 * p] / 255;
  }
  return { height, width, data: out };
}
