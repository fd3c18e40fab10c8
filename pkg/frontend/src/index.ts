export {
  CLASS_ORDER,
  TensorFormatError,
  classOrdinal,
  importTensor,
  oneHot,
  replicateChannels,
} from "./tensor.js";
export type { ClassCode, ImportedTensor, TensorSidecar } from "./tensor.js";
export { confusionMatrix, evaluatePredictions, perClassMetrics } from "./metrics.js";
export type { ClassMetrics, MetricsReport } from "./metrics.js";
export { lrAtEpoch, schedulePreset } from "./schedules.js";
export type { EarlyStop, FinetuneConfig, FrozenLayers, Head, Schedule } from "./schedules.js";
export { buildResNet50, loadPretrainedBase } from "./resnet50.js";
export {
  MissingWeightsError,
  attachHead,
  finetune,
  freezeLayers,
  layerChecksums,
} from "./harness.js";
export type { FinetuneResult, HarnessOptions } from "./harness.js";
