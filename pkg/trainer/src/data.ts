/** Dataset loading, train/test split, crops and geometric augmentation.
 *
 * A sample bundles the intensity image with its target maps (probability
 * plane + n distance planes, plane-major as stored in SDT files). Rotating
 * or flipping a sample has to permute the distance planes as well: the
 * planes are indexed by ray direction, and the transform moves direction k
 * to a different index. For a quarter rotation the shift is n/4 (so
 * rotations need n % 4 == 0); a row flip maps k to (n - k) % n.
 */

import * as fs from "fs";
import * as path from "path";

import { readGrayPng } from "./png";
import { readDenseMaps } from "./sdt";
import { Rng } from "./rng";

export interface Sample {
  height: number;
  width: number;
  rays: number;
  image: Float32Array; // H*W
  prob: Float32Array; // H*W
  dist: Float32Array; // rays*H*W, plane-major
}

function rot90Plane(src: Float32Array, h: number, w: number): Float32Array {
  // counter-clockwise quarter turn: out[i][j] = src[j][w-1-i], out dims (w, h)
  const out = new Float32Array(h * w);
  for (let i = 0; i < w; i++) {
    for (let j = 0; j < h; j++) {
      out[i * h + j] = src[j * w + (w - 1 - i)];
    }
  }
  return out;
}

function flipRowsPlane(src: Float32Array, h: number, w: number): Float32Array {
  const out = new Float32Array(h * w);
  for (let i = 0; i < h; i++) {
    out.set(src.subarray((h - 1 - i) * w, (h - i) * w), i * w);
  }
  return out;
}

/** Quarter rotation of a full sample, permuting distance planes by n/4. */
export function rot90(sample: Sample): Sample {
  const { height: h, width: w, rays: n } = sample;
  if (n % 4 !== 0) {
    throw new Error(`quarter rotations need rays divisible by 4, got ${n}`);
  }
  const dist = new Float32Array(sample.dist.length);
  const shift = n / 4;
  for (let c = 0; c < n; c++) {
    const srcPlane = sample.dist.subarray(((c + shift) % n) * h * w, ((c + shift) % n + 1) * h * w);
    dist.set(rot90Plane(srcPlane, h, w), c * h * w);
  }
  return {
    height: w,
    width: h,
    rays: n,
    image: rot90Plane(sample.image, h, w),
    prob: rot90Plane(sample.prob, h, w),
    dist,
  };
}

/** Row flip (top-bottom mirror) of a full sample, mapping ray k to (n-k) % n. */
export function flipRows(sample: Sample): Sample {
  const { height: h, width: w, rays: n } = sample;
  if (n % 2 !== 0) {
    throw new Error(`flips need an even ray count, got ${n}`);
  }
  const dist = new Float32Array(sample.dist.length);
  for (let c = 0; c < n; c++) {
    const srcPlane = sample.dist.subarray(((n - c) % n) * h * w, ((n - c) % n + 1) * h * w);
    dist.set(flipRowsPlane(srcPlane, h, w), c * h * w);
  }
  return {
    height: h,
    width: w,
    rays: n,
    image: flipRowsPlane(sample.image, h, w),
    prob: flipRowsPlane(sample.prob, h, w),
    dist,
  };
}

/** One of the 8 axis-aligned symmetries: k quarter turns plus optional flip. */
export function augment(sample: Sample, quarterTurns: number, flip: boolean): Sample {
  let out = sample;
  for (let t = 0; t < ((quarterTurns % 4) + 4) % 4; t++) out = rot90(out);
  return flip ? flipRows(out) : out;
}

export function randomAugment(sample: Sample, rng: Rng): Sample {
  const turns = sample.rays % 4 === 0 ? rng.int(4) : 0;
  const flip = sample.rays % 2 === 0 ? rng.int(2) === 1 : false;
  return augment(sample, turns, flip);
}

export function cropSample(sample: Sample, top: number, left: number, size: number): Sample {
  const { height: h, width: w, rays: n } = sample;
  if (top < 0 || left < 0 || top + size > h || left + size > w) {
    throw new Error(`crop ${size} at (${top}, ${left}) exceeds ${h}x${w}`);
  }
  const pick = (src: Float32Array, plane: number): void => {
    for (let i = 0; i < size; i++) {
      const row = src.subarray((top + i) * w + left, (top + i) * w + left + size);
      out.subarray(plane * size * size + i * size, plane * size * size + (i + 1) * size).set(row);
    }
  };
  const out = new Float32Array((2 + n) * size * size);
  pick(sample.image, 0);
  pick(sample.prob, 1);
  for (let c = 0; c < n; c++) pick(sample.dist.subarray(c * h * w, (c + 1) * h * w), 2 + c);
  return {
    height: size,
    width: size,
    rays: n,
    image: out.slice(0, size * size),
    prob: out.slice(size * size, 2 * size * size),
    dist: out.slice(2 * size * size),
  };
}

export function randomCrop(sample: Sample, size: number, rng: Rng): Sample {
  if (size > sample.height || size > sample.width) {
    throw new Error(`crop size ${size} exceeds image ${sample.height}x${sample.width}`);
  }
  const top = rng.int(sample.height - size + 1);
  const left = rng.int(sample.width - size + 1);
  return cropSample(sample, top, left, size);
}

function stems(dir: string, suffix: string): string[] {
  if (!fs.existsSync(dir) || !fs.statSync(dir).isDirectory()) {
    throw new Error(`not a directory: ${dir}`);
  }
  return fs
    .readdirSync(dir)
    .filter((f) => f.endsWith(suffix))
    .map((f) => f.slice(0, -suffix.length))
    .sort();
}

/** Load a dataset directory: images/NNNN.png paired with maps/NNNN.sdt. */
export function loadDataset(dataDir: string): Sample[] {
  const imageDir = path.join(dataDir, "images");
  const mapsDir = path.join(dataDir, "maps");
  const names = stems(imageDir, ".png");
  const mapNames = new Set(stems(mapsDir, ".sdt"));
  const paired = names.filter((s) => mapNames.has(s));
  if (paired.length === 0) {
    throw new Error(`no paired images/maps under ${dataDir}`);
  }
  return paired.map((stem) => {
    const img = readGrayPng(path.join(imageDir, `${stem}.png`));
    const maps = readDenseMaps(path.join(mapsDir, `${stem}.sdt`));
    if (maps.height !== img.height || maps.width !== img.width) {
      throw new Error(`${stem}: image is ${img.height}x${img.width} but maps are ${maps.height}x${maps.width}`);
    }
    const planeSize = maps.height * maps.width;
    return {
      height: img.height,
      width: img.width,
      rays: maps.rays,
      image: img.data,
      prob: maps.data.slice(0, planeSize),
      dist: maps.data.slice(planeSize),
    };
  });
}

/** Deterministic 90/10 split by index: first 90% train, rest held out. */
export function trainTestSplit<T>(items: T[]): { train: T[]; test: T[] } {
  const nTrain = Math.floor((items.length * 9) / 10);
  return { train: items.slice(0, nTrain), test: items.slice(nTrain) };
}
