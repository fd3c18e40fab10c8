/**
 * Reader for the exported image-tensor format.
 *
 * Blob: raw little-endian float32, row-major, shape [count, rows, cols].
 * Sidecar `<blob>.json`: { version, count, rows, cols, ramp_strength,
 * class_order, labels } with labels as class codes.
 */

import { readFileSync } from "node:fs";

export const TENSOR_VERSION = 1;

export const CLASS_ORDER = ["F", "N", "Q", "S", "V"] as const;
export type ClassCode = (typeof CLASS_ORDER)[number];

export interface TensorSidecar {
  version: number;
  count: number;
  rows: number;
  cols: number;
  ramp_strength: number;
  class_order: string[];
  labels: string[];
  [key: string]: unknown;
}

export interface ImportedTensor {
  /** flat row-major pixel data, length count*rows*cols */
  data: Float32Array;
  /** report-order ordinals (F=0 .. V=4), one per image */
  labels: Int32Array;
  meta: TensorSidecar;
}

export class TensorFormatError extends Error {}

export function sidecarPath(blobPath: string): string {
  return blobPath + ".json";
}

export function classOrdinal(code: string): number {
  const idx = CLASS_ORDER.indexOf(code as ClassCode);
  if (idx < 0) throw new TensorFormatError(`unknown class code ${JSON.stringify(code)}`);
  return idx;
}

/** Read blob + sidecar; fails with byte counts when sizes disagree. */
export function importTensor(blobPath: string): ImportedTensor {
  let metaRaw: string;
  try {
    metaRaw = readFileSync(sidecarPath(blobPath), "ascii");
  } catch {
    throw new TensorFormatError(`tensor sidecar not found: ${sidecarPath(blobPath)}`);
  }
  const meta = JSON.parse(metaRaw) as TensorSidecar;
  if (meta.version !== TENSOR_VERSION) {
    throw new TensorFormatError(`unsupported tensor version ${meta.version}`);
  }
  let blob: Buffer;
  try {
    blob = readFileSync(blobPath);
  } catch {
    throw new TensorFormatError(`tensor blob not found: ${blobPath}`);
  }
  const expected = meta.count * meta.rows * meta.cols * 4;
  if (blob.byteLength !== expected) {
    throw new TensorFormatError(
      `tensor blob ${blobPath} holds ${blob.byteLength} bytes, expected ${expected}`,
    );
  }
  if (meta.labels.length !== meta.count) {
    throw new TensorFormatError("sidecar label count does not match image count");
  }
  // copy into an aligned Float32Array; explicit little-endian read
  const view = new DataView(blob.buffer, blob.byteOffset, blob.byteLength);
  const data = new Float32Array(meta.count * meta.rows * meta.cols);
  for (let i = 0; i < data.length; i++) data[i] = view.getFloat32(i * 4, true);
  const labels = Int32Array.from(meta.labels, classOrdinal);
  return { data, labels, meta };
}

/**
 * Replicate single-channel images to three channels for a pretrained RGB
 * stem. Returns flat data of shape [count, rows, cols, 3].
 */
export function replicateChannels(t: ImportedTensor): Float32Array {
  const n = t.data.length;
  const out = new Float32Array(n * 3);
  for (let i = 0; i < n; i++) {
    const v = t.data[i];
    out[3 * i] = v;
    out[3 * i + 1] = v;
    out[3 * i + 2] = v;
  }
  return out;
}

/** One-hot encode report-order ordinals into a flat [n, 5] buffer. */
export function oneHot(labels: Int32Array, numClasses = CLASS_ORDER.length): Float32Array {
  const out = new Float32Array(labels.length * numClasses);
  labels.forEach((lab, i) => {
    out[i * numClasses + lab] = 1;
  });
  return out;
}
