/** SDT tensor container, matching the starpoly toolkit byte for byte:
 * little-endian, magic "SDT1", dtype code u8 (1 = float32, 2 = uint16,
 * 3 = int32), ndim u8, ndim x u32 dims, then raw row-major data. */

import * as fs from "fs";

const MAGIC = "SDT1";

export interface SdtTensor {
  dims: number[];
  data: Float32Array;
}

export function writeSdt(path: string, dims: number[], data: Float32Array): void {
  const count = dims.reduce((a, b) => a * b, 1);
  if (count !== data.length) {
    throw new Error(`dims ${dims} need ${count} values, got ${data.length}`);
  }
  const header = Buffer.alloc(6 + 4 * dims.length);
  header.write(MAGIC, 0, "ascii");
  header.writeUInt8(1, 4); // float32
  header.writeUInt8(dims.length, 5);
  dims.forEach((d, i) => header.writeUInt32LE(d, 6 + 4 * i));
  const payload = Buffer.from(data.buffer, data.byteOffset, data.byteLength);
  const tmp = `${path}.tmp${process.pid}`;
  fs.writeFileSync(tmp, Buffer.concat([header, payload]));
  fs.renameSync(tmp, path);
}

export function readSdt(path: string): SdtTensor {
  const blob = fs.readFileSync(path);
  if (blob.toString("ascii", 0, 4) !== MAGIC) {
    throw new Error(`${path}: bad magic at byte 0`);
  }
  const code = blob.readUInt8(4);
  if (code !== 1) {
    throw new Error(`${path}: expected float32 tensor (dtype code 1), got ${code}`);
  }
  const ndim = blob.readUInt8(5);
  const dims: number[] = [];
  for (let i = 0; i < ndim; i++) dims.push(blob.readUInt32LE(6 + 4 * i));
  const offset = 6 + 4 * ndim;
  const count = dims.reduce((a, b) => a * b, 1);
  if (blob.length !== offset + 4 * count) {
    throw new Error(
      `${path}: size mismatch at byte ${Math.min(blob.length, offset + 4 * count)}`
    );
  }
  const data = new Float32Array(count);
  for (let i = 0; i < count; i++) data[i] = blob.readFloatLE(offset + 4 * i);
  return { dims, data };
}

/** Dense maps are (1 + n, H, W): probability plane then n distance planes. */
export function readDenseMaps(path: string): { rays: number; height: number; width: number; data: Float32Array } {
  const { dims, data } = readSdt(path);
  if (dims.length !== 3 || dims[0] < 4) {
    throw new Error(`${path}: expected (1+n, H, W) dense maps with n >= 3, got ${dims}`);
  }
  return { rays: dims[0] - 1, height: dims[1], width: dims[2], data };
}
