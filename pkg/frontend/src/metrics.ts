/**
 * Per-class precision / recall / F1 reporting, field-compatible with the
 * report JSON emitted by the primary pipeline: every 0/0 is 0, macro is the
 * unweighted mean, weighted is the support-weighted mean, accuracy is
 * trace / total. Classes report alphabetically (F, N, Q, S, V).
 */

import { CLASS_ORDER } from "./tensor.js";

export interface ClassMetrics {
  precision: number;
  recall: number;
  f1: number;
  support: number;
}

export interface MetricsReport {
  classes: Record<string, ClassMetrics>;
  accuracy: number;
  macro_avg: ClassMetrics;
  weighted_avg: ClassMetrics;
}

function safeDiv(num: number, den: number): number {
  return den > 0 ? num / den : 0;
}

export function confusionMatrix(
  trueLabels: ArrayLike<number>,
  predictedLabels: ArrayLike<number>,
  numClasses = CLASS_ORDER.length,
): number[][] {
  if (trueLabels.length !== predictedLabels.length) {
    throw new Error("true and predicted label sequences differ in length");
  }
  const counts = Array.from({ length: numClasses }, () => new Array(numClasses).fill(0));
  for (let i = 0; i < trueLabels.length; i++) {
    counts[trueLabels[i]][predictedLabels[i]] += 1;
  }
  return counts;
}

export function perClassMetrics(
  counts: number[][],
  codes: readonly string[] = CLASS_ORDER,
): MetricsReport {
  const k = codes.length;
  const tp = new Array(k).fill(0);
  const support = new Array(k).fill(0);
  const predicted = new Array(k).fill(0);
  let total = 0;
  for (let i = 0; i < k; i++) {
    tp[i] = counts[i][i];
    for (let j = 0; j < k; j++) {
      support[i] += counts[i][j];
      predicted[i] += counts[j][i];
      total += counts[i][j];
    }
  }
  const classes: Record<string, ClassMetrics> = {};
  let macroP = 0;
  let macroR = 0;
  let macroF = 0;
  let wP = 0;
  let wR = 0;
  let wF = 0;
  let correct = 0;
  for (let i = 0; i < k; i++) {
    const precision = safeDiv(tp[i], predicted[i]);
    const recall = safeDiv(tp[i], support[i]);
    const f1 = safeDiv(2 * precision * recall, precision + recall);
    classes[codes[i]] = { precision, recall, f1, support: support[i] };
    macroP += precision / k;
    macroR += recall / k;
    macroF += f1 / k;
    const w = total > 0 ? support[i] / total : 0;
    wP += precision * w;
    wR += recall * w;
    wF += f1 * w;
    correct += tp[i];
  }
  return {
    classes,
    accuracy: total > 0 ? correct / total : 0,
    macro_avg: { precision: macroP, recall: macroR, f1: macroF, support: total },
    weighted_avg: { precision: wP, recall: wR, f1: wF, support: total },
  };
}

export function evaluatePredictions(
  trueLabels: ArrayLike<number>,
  predictedLabels: ArrayLike<number>,
): MetricsReport {
  return perClassMetrics(confusionMatrix(trueLabels, predictedLabels));
}
