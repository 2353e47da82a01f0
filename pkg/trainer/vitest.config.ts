import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    testTimeout: 120_000,
    hookTimeout: 60_000,
    // the integration test drives the full train/predict/decode/eval loop
    // and gets a dedicated budget
    slowTestThreshold: 30_000,
    pool: "forks",
    maxConcurrency: 1,
    fileParallelism: false,
  },
});
