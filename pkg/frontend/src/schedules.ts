/**
 * The training-schedule grid: learning rate, early stopping, frozen-layer
 * count and epoch budget per row, plus the optional dense heads tried
 * after the flatten layer.
 */

export type Head = "none" | "dense64" | "dense1024_drop50_dense64";
export type FrozenLayers = 0 | 125 | 150;

export interface EarlyStop {
  minDelta: number;
  patience: number;
  monitor: "acc" | "val_acc";
}

export interface Schedule {
  name: string;
  optimizer: "adam" | "sgd";
  lr: number;
  /** multiply lr by decayRate every decayEpochs epochs (0 = fixed) */
  decayRate: number;
  decayEpochs: number;
  l2: number;
  batchSize: number;
  epochs: number;
  earlyStop: EarlyStop | null;
  validationSplit: 0 | 0.2;
  frozenLayers: FrozenLayers;
  head: Head;
  useAugmented: boolean;
}

export interface FinetuneConfig {
  schedulePreset: number;
  tensorPath: string;
  /** evaluation tensor; defaults to training on tensorPath only */
  testTensorPath?: string;
}

const BASE: Omit<Schedule, "name" | "epochs"> = {
  optimizer: "adam",
  lr: 0.01,
  decayRate: 0,
  decayEpochs: 0,
  l2: 1e-4,
  batchSize: 32,
  epochs: 0,
  earlyStop: null,
  validationSplit: 0,
  frozenLayers: 150,
  head: "none",
  useAugmented: false,
} as Omit<Schedule, "name" | "epochs">;

const ES = { minDelta: 0.0005, patience: 5, monitor: "acc" as const };

/** Rows of the schedule grid; unstated knobs follow the primary's choices. */
export function schedulePreset(n: number): Schedule {
  const presets: Record<number, Schedule> = {
    1: { ...BASE, name: "preset1", optimizer: "sgd", batchSize: 64, epochs: 9, frozenLayers: 0 },
    2: {
      ...BASE, name: "preset2", optimizer: "sgd", batchSize: 64, epochs: 8,
      frozenLayers: 0, validationSplit: 0.2,
    },
    3: { ...BASE, name: "preset3", epochs: 23, earlyStop: ES, frozenLayers: 0 },
    4: { ...BASE, name: "preset4", epochs: 24, earlyStop: ES, frozenLayers: 125 },
    5: {
      ...BASE, name: "preset5", epochs: 22, validationSplit: 0.2,
      earlyStop: { ...ES, monitor: "val_acc" },
    },
    6: { ...BASE, name: "preset6", epochs: 22, earlyStop: ES },
    7: { ...BASE, name: "preset7", epochs: 50, decayRate: 0.5, decayEpochs: 20, head: "dense64" },
    8: { ...BASE, name: "preset8", epochs: 50, decayRate: 0.5, decayEpochs: 20 },
    9: { ...BASE, name: "preset9", epochs: 30, decayRate: 0.5, decayEpochs: 5, useAugmented: true },
    10: { ...BASE, name: "preset10", epochs: 30, decayRate: 0.5, decayEpochs: 5 },
  };
  const schedule = presets[n];
  if (!schedule) throw new Error(`schedule preset must be 1..10, got ${n}`);
  return schedule;
}

export function lrAtEpoch(schedule: Schedule, epoch: number): number {
  if (schedule.decayRate === 0 || schedule.decayEpochs === 0) return schedule.lr;
  return schedule.lr * Math.pow(schedule.decayRate, Math.floor(epoch / schedule.decayEpochs));
}
