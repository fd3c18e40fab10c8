import * as tf from "@tensorflow/tfjs";
import { describe, expect, it } from "vitest";

import {
  MissingWeightsError,
  attachHead,
  finetune,
  freezeLayers,
  layerChecksums,
} from "../src/harness.js";
import { evaluatePredictions } from "../src/metrics.js";
import { buildResNet50 } from "../src/resnet50.js";
import { lrAtEpoch, schedulePreset } from "../src/schedules.js";
import type { Schedule } from "../src/schedules.js";
import { importTensor, replicateChannels } from "../src/tensor.js";

const TENSOR = new URL("./fixtures/beats12.f32", import.meta.url).pathname;

/** Small convolutional backbone standing in for the pretrained base. */
function smokeBackbone(): tf.LayersModel {
  const input = tf.input({ shape: [128, 128, 3] });
  let x = tf.layers
    .conv2d({ filters: 8, kernelSize: 7, strides: 4, activation: "relu" })
    .apply(input) as tf.SymbolicTensor;
  x = tf.layers.maxPooling2d({ poolSize: 4, strides: 4 }).apply(x) as tf.SymbolicTensor;
  x = tf.layers
    .conv2d({ filters: 16, kernelSize: 3, strides: 2, activation: "relu" })
    .apply(x) as tf.SymbolicTensor;
  x = tf.layers.globalAveragePooling2d({}).apply(x) as tf.SymbolicTensor;
  return tf.model({ inputs: input, outputs: x });
}

function smokeSchedule(overrides: Partial<Schedule> = {}): Schedule {
  return {
    ...schedulePreset(10),
    name: "smoke",
    epochs: 2,
    batchSize: 6,
    frozenLayers: 0,
    ...overrides,
  } as Schedule;
}

describe("schedule grid", () => {
  it("mirrors the freeze/head/epoch rows", () => {
    expect(schedulePreset(3).frozenLayers).toBe(0);
    expect(schedulePreset(4).frozenLayers).toBe(125);
    expect(schedulePreset(10).frozenLayers).toBe(150);
    expect(schedulePreset(10).epochs).toBe(30);
    expect(schedulePreset(10).decayRate).toBe(0.5);
    expect(schedulePreset(10).decayEpochs).toBe(5);
    expect(schedulePreset(7).head).toBe("dense64");
    expect(schedulePreset(5).validationSplit).toBe(0.2);
    expect(schedulePreset(3).earlyStop).toEqual({ minDelta: 0.0005, patience: 5, monitor: "acc" });
    expect(() => schedulePreset(0)).toThrow(/preset/);
  });

  it("applies step decay to the learning rate", () => {
    const s = schedulePreset(10);
    expect(lrAtEpoch(s, 0)).toBeCloseTo(0.01, 12);
    expect(lrAtEpoch(s, 4)).toBeCloseTo(0.01, 12);
    expect(lrAtEpoch(s, 5)).toBeCloseTo(0.005, 12);
    expect(lrAtEpoch(s, 10)).toBeCloseTo(0.0025, 12);
  });
});

describe("resnet50 graph", () => {
  it("has enough layers for the 125/150 freeze points and the known widths", () => {
    const model = buildResNet50();
    expect(model.layers.length).toBeGreaterThan(150);
    const conv1 = model.getLayer("conv1_conv");
    expect(conv1.getWeights()[0].shape).toEqual([7, 7, 3, 64]);
    const lastConv = model.getLayer("conv5_block3_3_conv");
    expect(lastConv.getWeights()[0].shape[3]).toBe(2048);
    // headless backbone parameter count of the standard architecture
    const params = model.countParams();
    expect(params).toBeGreaterThan(23_000_000);
    expect(params).toBeLessThan(24_000_000);
  });

  it("freezing the first 150 layers leaves later stages trainable", () => {
    const model = buildResNet50();
    const frozen = freezeLayers(model, 150, { verbose: false });
    expect(frozen).toBe(150);
    expect(model.layers[0].trainable).toBe(false);
    expect(model.layers[149].trainable).toBe(false);
    expect(model.layers[model.layers.length - 1].trainable).toBe(true);
  });
});

describe("finetune", () => {
  it("refuses to run without pretrained weights", async () => {
    await expect(
      finetune({ schedulePreset: 10, tensorPath: TENSOR }, { verbose: false }),
    ).rejects.toBeInstanceOf(MissingWeightsError);
  });

  it("trains an injected backbone and reports the metric schema", async () => {
    const result = await finetune(
      { schedule: smokeSchedule(), trainTensorPath: TENSOR },
      { baseModel: smokeBackbone(), verbose: false },
    );
    expect(result.history.length).toBe(2);
    expect(Object.keys(result.report.classes).sort()).toEqual(["F", "N", "Q", "S", "V"]);
    expect(result.report.weighted_avg.support).toBe(12);
    expect(result.report.accuracy).toBeGreaterThanOrEqual(0);
    expect(result.report.accuracy).toBeLessThanOrEqual(1);
    expect(result.trainableParams).toBeGreaterThan(0);
  });

  it("keeps frozen-layer checksums fixed across training", async () => {
    const base = smokeBackbone();
    const before = layerChecksums(base);
    const result = await finetune(
      { schedule: smokeSchedule(), trainTensorPath: TENSOR },
      { baseModel: base, frozenLayers: base.layers.length, verbose: false },
    );
    expect(result.frozenLayerCount).toBe(base.layers.length);
    const after = layerChecksums(result.model);
    for (const [name, sum] of before) {
      expect(after.get(name), name).toBeCloseTo(sum, 10);
    }
  });

  it("zero-epoch run reports the initialized head's metrics (smoke test)", async () => {
    const base = smokeBackbone();
    const schedule = smokeSchedule({ epochs: 0 });
    const result = await finetune(
      { schedule, trainTensorPath: TENSOR },
      { baseModel: base, verbose: false },
    );
    expect(result.history.length).toBe(0);
    // the model was never fit: predicting again reproduces the report
    const t = importTensor(TENSOR);
    const x = tf.tensor4d(replicateChannels(t), [t.meta.count, 128, 128, 3]);
    const preds = (result.model.predict(x) as tf.Tensor2D).argMax(-1);
    const report = evaluatePredictions(t.labels, (await preds.data()) as Int32Array);
    expect(report).toEqual(result.report);
  });
});
