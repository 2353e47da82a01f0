/** Backend selection: the wasm backend's XNNPACK kernels are the only
 * workable CPU option in plain Node (the pure-JS backend is orders of
 * magnitude slower for convolutions). */

import * as path from "path";
import * as tf from "@tensorflow/tfjs";
import { setWasmPaths } from "@tensorflow/tfjs-backend-wasm";

let ready: Promise<void> | null = null;

export function initBackend(): Promise<void> {
  if (!ready) {
    const wasmFile = require.resolve(
      "@tensorflow/tfjs-backend-wasm/dist/tfjs-backend-wasm.wasm"
    );
    setWasmPaths(path.dirname(wasmFile) + path.sep);
    ready = tf.setBackend("wasm").then(() => tf.ready());
  }
  return ready;
}
