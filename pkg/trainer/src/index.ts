export { Rng } from "./rng";
export { readSdt, writeSdt, readDenseMaps, SdtTensor } from "./sdt";
export { readGrayPng, GrayImage } from "./png";
export {
  Sample,
  augment,
  cropSample,
  flipRows,
  loadDataset,
  randomAugment,
  randomCrop,
  rot90,
  trainTestSplit,
} from "./data";
export { ModelSpec, ModelVars, buildVars, disposeVars, forward, varNames } from "./model";
export { bce, totalLoss, weightedMae } from "./loss";
export { CheckpointMeta, loadCheckpoint, saveCheckpoint } from "./checkpoint";
export { TRAIN_DEFAULTS, TrainConfig, TrainResult, train } from "./train";
export { PredictResult, predict } from "./predict";
export { initBackend } from "./backend";
