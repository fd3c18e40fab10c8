/**
 * ResNet50 graph (Keras v1 layout): 7x7/2 stem, [3,4,6,3] bottleneck
 * stages, global average pooling. Weights load from a layers-model URL
 * when one is supplied; otherwise the graph starts from random
 * initialization (which is only useful for structural tests, and the
 * harness refuses to "fine-tune" it unless explicitly allowed).
 */

import * as tf from "@tensorflow/tfjs";

function convBlock(
  x: tf.SymbolicTensor,
  filters: [number, number, number],
  stage: number,
  block: string,
  stride: number,
): tf.SymbolicTensor {
  const name = `conv${stage}_${block}`;
  const [f1, f2, f3] = filters;
  let main = tf.layers
    .conv2d({ filters: f1, kernelSize: 1, strides: stride, name: `${name}_1_conv` })
    .apply(x) as tf.SymbolicTensor;
  main = tf.layers.batchNormalization({ name: `${name}_1_bn` }).apply(main) as tf.SymbolicTensor;
  main = tf.layers.reLU({ name: `${name}_1_relu` }).apply(main) as tf.SymbolicTensor;
  main = tf.layers
    .conv2d({ filters: f2, kernelSize: 3, padding: "same", name: `${name}_2_conv` })
    .apply(main) as tf.SymbolicTensor;
  main = tf.layers.batchNormalization({ name: `${name}_2_bn` }).apply(main) as tf.SymbolicTensor;
  main = tf.layers.reLU({ name: `${name}_2_relu` }).apply(main) as tf.SymbolicTensor;
  main = tf.layers
    .conv2d({ filters: f3, kernelSize: 1, name: `${name}_3_conv` })
    .apply(main) as tf.SymbolicTensor;
  main = tf.layers.batchNormalization({ name: `${name}_3_bn` }).apply(main) as tf.SymbolicTensor;

  const shortcut = tf.layers
    .conv2d({ filters: f3, kernelSize: 1, strides: stride, name: `${name}_0_conv` })
    .apply(x) as tf.SymbolicTensor;
  const shortcutBn = tf.layers
    .batchNormalization({ name: `${name}_0_bn` })
    .apply(shortcut) as tf.SymbolicTensor;

  const added = tf.layers.add({ name: `${name}_add` }).apply([main, shortcutBn]) as tf.SymbolicTensor;
  return tf.layers.reLU({ name: `${name}_out` }).apply(added) as tf.SymbolicTensor;
}

function identityBlock(
  x: tf.SymbolicTensor,
  filters: [number, number, number],
  stage: number,
  block: string,
): tf.SymbolicTensor {
  const name = `conv${stage}_${block}`;
  const [f1, f2, f3] = filters;
  let main = tf.layers
    .conv2d({ filters: f1, kernelSize: 1, name: `${name}_1_conv` })
    .apply(x) as tf.SymbolicTensor;
  main = tf.layers.batchNormalization({ name: `${name}_1_bn` }).apply(main) as tf.SymbolicTensor;
  main = tf.layers.reLU({ name: `${name}_1_relu` }).apply(main) as tf.SymbolicTensor;
  main = tf.layers
    .conv2d({ filters: f2, kernelSize: 3, padding: "same", name: `${name}_2_conv` })
    .apply(main) as tf.SymbolicTensor;
  main = tf.layers.batchNormalization({ name: `${name}_2_bn` }).apply(main) as tf.SymbolicTensor;
  main = tf.layers.reLU({ name: `${name}_2_relu` }).apply(main) as tf.SymbolicTensor;
  main = tf.layers
    .conv2d({ filters: f3, kernelSize: 1, name: `${name}_3_conv` })
    .apply(main) as tf.SymbolicTensor;
  main = tf.layers.batchNormalization({ name: `${name}_3_bn` }).apply(main) as tf.SymbolicTensor;
  const added = tf.layers.add({ name: `${name}_add` }).apply([main, x]) as tf.SymbolicTensor;
  return tf.layers.reLU({ name: `${name}_out` }).apply(added) as tf.SymbolicTensor;
}

export interface ResNet50Options {
  inputShape?: [number, number, number];
}

/** Headless ResNet50 ending in global average pooling. */
export function buildResNet50(options: ResNet50Options = {}): tf.LayersModel {
  const inputShape = options.inputShape ?? [128, 128, 3];
  const input = tf.input({ shape: inputShape, name: "input_1" });
  let x = tf.layers
    .zeroPadding2d({ padding: [3, 3], name: "conv1_pad" })
    .apply(input) as tf.SymbolicTensor;
  x = tf.layers
    .conv2d({ filters: 64, kernelSize: 7, strides: 2, name: "conv1_conv" })
    .apply(x) as tf.SymbolicTensor;
  x = tf.layers.batchNormalization({ name: "conv1_bn" }).apply(x) as tf.SymbolicTensor;
  x = tf.layers.reLU({ name: "conv1_relu" }).apply(x) as tf.SymbolicTensor;
  x = tf.layers
    .zeroPadding2d({ padding: [1, 1], name: "pool1_pad" })
    .apply(x) as tf.SymbolicTensor;
  x = tf.layers
    .maxPooling2d({ poolSize: 3, strides: 2, name: "pool1_pool" })
    .apply(x) as tf.SymbolicTensor;

  const stages: Array<[number, [number, number, number], number, number]> = [
    [2, [64, 64, 256], 3, 1],
    [3, [128, 128, 512], 4, 2],
    [4, [256, 256, 1024], 6, 2],
    [5, [512, 512, 2048], 3, 2],
  ];
  for (const [stage, filters, blocks, stride] of stages) {
    x = convBlock(x, filters, stage, "block1", stride);
    for (let b = 2; b <= blocks; b++) {
      x = identityBlock(x, filters, stage, `block${b}`);
    }
  }
  x = tf.layers.globalAveragePooling2d({ name: "avg_pool" }).apply(x) as tf.SymbolicTensor;
  return tf.model({ inputs: input, outputs: x, name: "resnet50_backbone" });
}

/**
 * Load a pretrained layers-model (e.g. a converted ImageNet ResNet50).
 * Accepts any URL scheme tfjs has an IO handler for in this runtime.
 */
export async function loadPretrainedBase(url: string): Promise<tf.LayersModel> {
  return tf.loadLayersModel(url);
}
