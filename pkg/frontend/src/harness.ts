/**
 * The fine-tuning harness: tensor in, frozen/head/schedule grid applied,
 * metrics report out (same JSON schema as the primary pipeline).
 */

import * as tf from "@tensorflow/tfjs";

import { MetricsReport, evaluatePredictions } from "./metrics.js";
import { FrozenLayers, Head, Schedule, lrAtEpoch, schedulePreset } from "./schedules.js";
import { CLASS_ORDER, ImportedTensor, importTensor, oneHot, replicateChannels } from "./tensor.js";
import { buildResNet50, loadPretrainedBase } from "./resnet50.js";

export class MissingWeightsError extends Error {}

export interface HarnessOptions {
  /** injected backbone (tests use a small one); overrides weightsUrl */
  baseModel?: tf.LayersModel;
  /** URL of a converted pretrained layers-model */
  weightsUrl?: string;
  /** build the full ResNet50 with random init instead of failing (structural runs) */
  allowRandomInit?: boolean;
  /** override the schedule's frozen count (index into the flattened layer list) */
  frozenLayers?: number;
  head?: Head;
  verbose?: boolean;
}

export interface FinetuneResult {
  model: tf.LayersModel;
  report: MetricsReport;
  history: Array<Record<string, number>>;
  frozenLayerCount: number;
  totalLayerCount: number;
  trainableParams: number;
  nonTrainableParams: number;
}

function log(opts: HarnessOptions, message: string): void {
  if (opts.verbose !== false) console.log(message);
}

async function resolveBase(opts: HarnessOptions): Promise<tf.LayersModel> {
  if (opts.baseModel) return opts.baseModel;
  if (opts.weightsUrl) return loadPretrainedBase(opts.weightsUrl);
  if (opts.allowRandomInit) return buildResNet50();
  throw new MissingWeightsError(
    "no pretrained weights available: pass weightsUrl, inject baseModel, " +
      "or set allowRandomInit for a structural run",
  );
}

/** Freeze the first `count` layers of the flattened layer list; logs counts. */
export function freezeLayers(model: tf.LayersModel, count: number, opts: HarnessOptions = {}): number {
  let frozen = 0;
  model.layers.forEach((layer, index) => {
    const freeze = index < count;
    layer.trainable = !freeze;
    if (freeze) frozen += 1;
  });
  log(opts, `frozen ${frozen} of ${model.layers.length} layers (flattened list)`);
  return frozen;
}

export function attachHead(base: tf.LayersModel, head: Head, l2: number): tf.LayersModel {
  const reg = tf.regularizers.l2({ l2 });
  let x = base.outputs[0] as tf.SymbolicTensor;
  if (x.shape.length > 2) {
    x = tf.layers.flatten({ name: "head_flatten" }).apply(x) as tf.SymbolicTensor;
  }
  if (head === "dense64") {
    x = tf.layers
      .dense({ units: 64, activation: "relu", kernelRegularizer: reg, name: "head_dense64" })
      .apply(x) as tf.SymbolicTensor;
  } else if (head === "dense1024_drop50_dense64") {
    x = tf.layers
      .dense({ units: 1024, activation: "relu", kernelRegularizer: reg, name: "head_dense1024" })
      .apply(x) as tf.SymbolicTensor;
    x = tf.layers.dropout({ rate: 0.5, name: "head_drop" }).apply(x) as tf.SymbolicTensor;
    x = tf.layers
      .dense({ units: 64, activation: "relu", kernelRegularizer: reg, name: "head_dense64b" })
      .apply(x) as tf.SymbolicTensor;
  }
  const out = tf.layers
    .dense({
      units: CLASS_ORDER.length,
      activation: "softmax",
      kernelRegularizer: reg,
      name: "classifier",
    })
    .apply(x) as tf.SymbolicTensor;
  return tf.model({ inputs: base.inputs, outputs: out, name: "finetune_model" });
}

function countParams(model: tf.LayersModel): { trainable: number; nonTrainable: number } {
  const sizeOf = (shape: Array<number | null>): number =>
    shape.reduce<number>((a, b) => a * (b ?? 1), 1);
  let trainable = 0;
  let nonTrainable = 0;
  for (const w of model.trainableWeights) trainable += sizeOf(w.shape);
  for (const w of model.nonTrainableWeights) nonTrainable += sizeOf(w.shape);
  return { trainable, nonTrainable };
}

/** Per-layer weight checksums; frozen layers must keep theirs across fit(). */
export function layerChecksums(model: tf.LayersModel): Map<string, number> {
  const sums = new Map<string, number>();
  for (const layer of model.layers) {
    const weights = layer.getWeights();
    if (weights.length === 0) continue;
    let acc = 0;
    for (const w of weights) {
      const data = w.dataSync();
      for (let i = 0; i < data.length; i++) acc += data[i];
    }
    sums.set(layer.name, acc);
  }
  return sums;
}

function tensor4dFromImported(t: ImportedTensor): tf.Tensor4D {
  const rgb = replicateChannels(t);
  return tf.tensor4d(rgb, [t.meta.count, t.meta.rows, t.meta.cols, 3]);
}

export interface FinetuneInputs {
  schedule: Schedule;
  trainTensorPath: string;
  testTensorPath?: string;
}

export async function finetune(
  inputs: FinetuneInputs | { schedulePreset: number; tensorPath: string; testTensorPath?: string },
  opts: HarnessOptions = {},
): Promise<FinetuneResult> {
  const schedule: Schedule =
    "schedule" in inputs ? inputs.schedule : schedulePreset(inputs.schedulePreset);
  const trainPath = "schedule" in inputs ? inputs.trainTensorPath : inputs.tensorPath;
  const testPath = inputs.testTensorPath ?? trainPath;

  const trainTensor = importTensor(trainPath);
  const testTensor = importTensor(testPath);

  const base = await resolveBase(opts);
  log(opts, `backend: ${tf.getBackend()} (no GPU binding in this runtime falls back to CPU)`);

  const frozenTarget = opts.frozenLayers ?? schedule.frozenLayers;
  const frozenCount = freezeLayers(base, frozenTarget, opts);
  const model = attachHead(base, opts.head ?? schedule.head, schedule.l2);

  const optimizer =
    schedule.optimizer === "adam"
      ? tf.train.adam(schedule.lr, 0.9, 0.99, 1e-7)
      : tf.train.sgd(schedule.lr);
  model.compile({
    optimizer,
    loss: "categoricalCrossentropy",
    metrics: ["accuracy"],
  });
  const params = countParams(model);
  log(opts, `trainable params: ${params.trainable}, non-trainable: ${params.nonTrainable}`);

  const x = tensor4dFromImported(trainTensor);
  const y = tf.tensor2d(oneHot(trainTensor.labels), [trainTensor.meta.count, CLASS_ORDER.length]);

  const history: Array<Record<string, number>> = [];
  const callbacks: tf.CustomCallbackArgs = {
    onEpochBegin: async (epoch) => {
      const lr = lrAtEpoch(schedule, epoch);
      // tfjs optimizers expose a mutable learningRate
      (optimizer as unknown as { learningRate: number }).learningRate = lr;
    },
    onEpochEnd: async (epoch, logs) => {
      const row: Record<string, number> = { epoch: epoch + 1, lr: lrAtEpoch(schedule, epoch) };
      for (const [key, value] of Object.entries(logs ?? {})) row[key] = value as number;
      history.push(row);
      log(opts, `epoch ${epoch + 1}: ${JSON.stringify(logs)}`);
    },
  };
  const fitCallbacks: tf.Callback[] = [];
  if (schedule.earlyStop) {
    fitCallbacks.push(
      tf.callbacks.earlyStopping({
        monitor: schedule.earlyStop.monitor === "val_acc" ? "val_acc" : "acc",
        minDelta: schedule.earlyStop.minDelta,
        patience: schedule.earlyStop.patience,
      }) as unknown as tf.Callback,
    );
  }

  if (schedule.epochs > 0) {
    await model.fit(x, y, {
      epochs: schedule.epochs,
      batchSize: schedule.batchSize,
      validationSplit: schedule.validationSplit,
      shuffle: true,
      verbose: 0,
      callbacks: [callbacks, ...fitCallbacks],
    });
  }

  const xTest = tensor4dFromImported(testTensor);
  const probs = model.predict(xTest, { batchSize: schedule.batchSize }) as tf.Tensor2D;
  const predictions = (await probs.argMax(-1).data()) as Int32Array;
  const report = evaluatePredictions(testTensor.labels, predictions);

  tf.dispose([x, y, xTest, probs]);
  return {
    model,
    report,
    history,
    frozenLayerCount: frozenCount,
    totalLayerCount: base.layers.length,
    trainableParams: params.trainable,
    nonTrainableParams: params.nonTrainable,
  };
}
