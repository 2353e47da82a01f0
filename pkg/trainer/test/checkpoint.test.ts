import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";
import { beforeAll, describe, expect, it } from "vitest";

import { initBackend } from "../src/backend";
import { loadCheckpoint, saveCheckpoint } from "../src/checkpoint";
import { ModelSpec, buildVars, disposeVars, forward } from "../src/model";

beforeAll(async () => {
  await initBackend();
});

describe("checkpoint", () => {
  it("round-trips weights and metadata", () => {
    const spec: ModelSpec = { rays: 8, widths: [4, 8] };
    const vars = buildVars(spec, 9);
    const file = path.join(fs.mkdtempSync(path.join(os.tmpdir(), "ckpt-")), "m.ckpt");
    const meta = {
      rays: 8, widths: [4, 8], seed: 9, cropSize: 32, epochs: 2,
      lambda: 0.2, epochLosses: [1.5, 1.2],
    };
    saveCheckpoint(file, meta, vars);
    const back = loadCheckpoint(file);
    expect(back.meta).toEqual(meta);
    const x = tf.randomNormal([1, 16, 16, 1], 0, 1, "float32", 3) as tf.Tensor4D;
    const [p1] = forward(x, vars, spec);
    const [p2] = forward(x, back.vars, spec);
    expect(Array.from(p1.dataSync())).toEqual(Array.from(p2.dataSync()));
    disposeVars(vars);
    disposeVars(back.vars);
  });

  it("rejects foreign files", () => {
    const file = path.join(fs.mkdtempSync(path.join(os.tmpdir(), "ckpt-")), "x.ckpt");
    fs.writeFileSync(file, Buffer.from("not a checkpoint"));
    expect(() => loadCheckpoint(file)).toThrow(/not a trainer checkpoint/);
  });
});
