/** Single-file checkpoint: magic "SPCK", u32 header length, JSON header
 * (model spec + training record), then the float32 weight payloads in the
 * header's name order. */

import * as fs from "fs";
import * as tf from "@tensorflow/tfjs";

import { ModelSpec, ModelVars, buildVarsShapeOnly } from "./model";

const MAGIC = "SPCK";

export interface CheckpointMeta {
  rays: number;
  widths: number[];
  seed: number;
  cropSize: number;
  epochs: number;
  lambda: number;
  epochLosses: number[];
}

export function saveCheckpoint(path: string, meta: CheckpointMeta, vars: ModelVars): void {
  const spec: ModelSpec = { rays: meta.rays, widths: meta.widths };
  const names = Object.keys(buildVarsShapeOnly(spec));
  const header = Buffer.from(JSON.stringify({ format: 1, meta, names }), "utf8");
  const parts = [
    Buffer.from(MAGIC, "ascii"),
    (() => {
      const b = Buffer.alloc(4);
      b.writeUInt32LE(header.length, 0);
      return b;
    })(),
    header,
  ];
  for (const name of names) {
    const data = vars[name].dataSync() as Float32Array;
    const payload = Buffer.allocUnsafe(4 * data.length);
    for (let i = 0; i < data.length; i++) payload.writeFloatLE(data[i], 4 * i);
    parts.push(payload);
  }
  const tmp = `${path}.tmp${process.pid}`;
  fs.writeFileSync(tmp, Buffer.concat(parts));
  fs.renameSync(tmp, path);
}

export function loadCheckpoint(path: string): { meta: CheckpointMeta; vars: ModelVars } {
  const blob = fs.readFileSync(path);
  if (blob.toString("ascii", 0, 4) !== MAGIC) {
    throw new Error(`${path}: not a trainer checkpoint`);
  }
  const headerLen = blob.readUInt32LE(4);
  const header = JSON.parse(blob.toString("utf8", 8, 8 + headerLen));
  const meta: CheckpointMeta = header.meta;
  const spec: ModelSpec = { rays: meta.rays, widths: meta.widths };
  const shapes = buildVarsShapeOnly(spec);
  const names: string[] = header.names;
  const vars: ModelVars = {};
  let offset = 8 + headerLen;
  for (const name of names) {
    const shape = shapes[name];
    if (!shape) throw new Error(`${path}: unknown variable ${name}`);
    const count = shape.reduce((a, b) => a * b, 1);
    const data = new Float32Array(count);
    for (let i = 0; i < count; i++) data[i] = blob.readFloatLE(offset + 4 * i);
    offset += 4 * count;
    vars[name] = tf.variable(tf.tensor(data, shape, "float32"));
  }
  if (offset !== blob.length) {
    throw new Error(`${path}: ${blob.length - offset} trailing bytes`);
  }
  return { meta, vars };
}
