"""Training schedules, the train step, and the fit loop.

The ten named presets mirror the experiment grid that selected the final
configuration: learning rate, early-stopping (min delta / patience), frozen
prefix, epoch budget and head per row. Where the grid leaves a knob
unstated (optimizer flavor, batch size), the presets use Adam with batch 32
for rows 3-10 and plain mini-batch SGD with batch 64 for rows 1-2.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DivergenceError, ValidationError
from .layers import softmax
from .net import ArchConfig, CnnModel, baseline_arch, default_arch
from .optim import Adam, Sgd, lr_at_epoch

DEFAULT_L2 = 1e-4


@dataclass(frozen=True)
class EarlyStopConfig:
    min_delta: float = 0.0005
    patience: int = 5
    monitor: str = "val_acc"  # "val_acc" | "acc"


@dataclass(frozen=True)
class TrainSchedule:
    name: str = "custom"
    model: str = "default"  # "default" | "baseline"
    optimizer: str = "adam"  # "adam" | "sgd_minibatch"
    lr: float = 0.01
    lr_policy: str = "fixed"  # "fixed" | "step_decay"
    lr_decay_rate: float = 0.5
    lr_decay_period: int = 5
    l2: float = DEFAULT_L2
    batch_size: int = 32
    epochs: int = 30
    early_stop: EarlyStopConfig | None = None
    val_fraction: float = 0.0  # 0.0 or 0.2
    head: str = "none"
    freeze: str = "none"  # "none" | "stem_stage1"
    use_augmented: bool = False
    adam_beta1: float = 0.9
    adam_beta2: float = 0.99  # printed grid value; override for the 0.999 default
    adam_eps: float = 1e-7

    def __post_init__(self):
        if self.lr <= 0:
            raise ValidationError("learning rate must be positive")
        if self.l2 < 0:
            raise ValidationError("l2 coefficient must be >= 0")
        if self.batch_size < 1:
            raise ValidationError("batch size must be >= 1")
        if self.val_fraction not in (0.0, 0.2):
            raise ValidationError("val_fraction must be 0.0 or 0.2")
        if self.early_stop is not None and self.early_stop.monitor == "val_acc" and self.val_fraction == 0.0:
            raise ValidationError("early stopping on val_acc requires val_fraction > 0")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "TrainSchedule":
        data = json.loads(text)
        es = data.pop("early_stop", None)
        schedule = cls(**data, early_stop=EarlyStopConfig(**es) if es else None)
        return schedule

    def build_model(self, seed: int) -> CnnModel:
        arch_fn = baseline_arch if self.model == "baseline" else default_arch
        model = CnnModel(arch_fn(head=self.head), seed=seed)
        if self.freeze == "stem_stage1":
            model.freeze_prefix(("stem", "stage1"))
        elif self.freeze != "none":
            raise ValidationError(f"unknown freeze mode {self.freeze!r}")
        return model

    def make_optimizer(self):
        if self.optimizer == "adam":
            return Adam(self.lr, self.adam_beta1, self.adam_beta2, self.adam_eps)
        if self.optimizer == "sgd_minibatch":
            return Sgd(self.lr)
        raise ValidationError(f"unknown optimizer {self.optimizer!r}")


def schedule_preset(number: int) -> TrainSchedule:
    """Presets 1-10; see the module docstring for the unstated-knob defaults."""
    es = EarlyStopConfig(min_delta=0.0005, patience=5, monitor="acc")
    es_val = EarlyStopConfig(min_delta=0.0005, patience=5, monitor="val_acc")
    presets = {
        1: TrainSchedule(name="preset1", model="baseline", optimizer="sgd_minibatch",
                         lr=0.01, batch_size=64, epochs=9),
        2: TrainSchedule(name="preset2", optimizer="sgd_minibatch", lr=0.01,
                         batch_size=64, epochs=8, val_fraction=0.2),
        3: TrainSchedule(name="preset3", lr=0.01, epochs=23, early_stop=es),
        4: TrainSchedule(name="preset4", lr=0.01, epochs=24, early_stop=es, freeze="stem_stage1"),
        5: TrainSchedule(name="preset5", lr=0.01, epochs=22, early_stop=es_val,
                         val_fraction=0.2, freeze="stem_stage1"),
        6: TrainSchedule(name="preset6", lr=0.01, epochs=22, early_stop=es, freeze="stem_stage1"),
        7: TrainSchedule(name="preset7", lr=0.01, lr_policy="step_decay", lr_decay_period=20,
                         epochs=50, freeze="stem_stage1", head="dense64"),
        8: TrainSchedule(name="preset8", lr=0.01, lr_policy="step_decay", lr_decay_period=20,
                         epochs=50, freeze="stem_stage1"),
        9: TrainSchedule(name="preset9", lr=0.01, lr_policy="step_decay", lr_decay_period=5,
                         epochs=30, freeze="stem_stage1", use_augmented=True),
        10: TrainSchedule(name="preset10", lr=0.01, lr_policy="step_decay", lr_decay_period=5,
                          epochs=30, freeze="stem_stage1"),
    }
    if number not in presets:
        raise ValidationError(f"schedule preset must be 1..10, got {number}")
    return presets[number]


def load_schedule(source: str | Path) -> TrainSchedule:
    """Resolve a schedule from a preset number ('1'..'10') or a JSON file path."""
    text = str(source)
    if text.isdigit():
        return schedule_preset(int(text))
    path = Path(text)
    if not path.is_file():
        raise ValidationError(f"schedule {source!r} is neither a preset number nor a file")
    return TrainSchedule.from_json(path.read_text())


def cross_entropy(probs: np.ndarray, onehot: np.ndarray) -> float:
    """Mean negative log-likelihood of the true classes."""
    p_true = (probs * onehot).sum(axis=1)
    return float(-np.log(np.maximum(p_true, 1e-12)).mean())


def l2_penalty(model: CnnModel, l2: float) -> float:
    if l2 == 0.0:
        return 0.0
    return l2 * float(sum((layer.params[key].astype(np.float64) ** 2).sum()
                          for layer, key in model.l2_entries()))


def loss(probs: np.ndarray, labels: np.ndarray, model: CnnModel | None = None, l2: float = 0.0) -> float:
    """Batch loss: cross entropy plus l2 * sum of squared conv/dense kernels."""
    onehot = _to_onehot(labels, probs.shape[1])
    total = cross_entropy(probs, onehot)
    if model is not None and l2 > 0:
        total += l2_penalty(model, l2)
    return total


def _to_onehot(labels: np.ndarray, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim == 2:
        return labels
    onehot = np.zeros((labels.shape[0], num_classes), dtype=np.float64)
    onehot[np.arange(labels.shape[0]), labels.astype(np.int64)] = 1.0
    return onehot


def train_step(model: CnnModel, optimizer, xb: np.ndarray, yb: np.ndarray, l2: float,
               start: int = 0) -> tuple[float, float]:
    """One optimizer update on a batch. Returns (loss, batch accuracy).

    `start` lets the batch enter above a frozen prefix (precomputed
    features). Raises DivergenceError when the loss goes non-finite.
    """
    logits = model.forward_logits(xb, training=True, start=start)
    probs = softmax(logits)
    onehot = _to_onehot(yb, probs.shape[1]).astype(logits.dtype)
    batch_loss = cross_entropy(probs, onehot) + l2_penalty(model, l2)
    if not np.isfinite(batch_loss):
        raise DivergenceError(f"non-finite training loss {batch_loss!r}")
    acc = float((np.argmax(probs, axis=1) == np.argmax(onehot, axis=1)).mean())

    dlogits = (probs - onehot) / probs.shape[0]
    model.backward(dlogits.astype(logits.dtype))
    if l2 > 0:
        for layer, key in model.l2_entries():
            if not layer.frozen:
                layer.grads[key] += (2.0 * l2) * layer.params[key]
    optimizer.step(model.trainable_entries())
    return batch_loss, acc


@dataclass
class TrainHistory:
    epochs: list[dict] = field(default_factory=list)
    stopped_early: bool = False
    stop_epoch: int | None = None

    def append(self, **row):
        self.epochs.append(row)

    def __len__(self):
        return len(self.epochs)

    def to_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "stopped_early": self.stopped_early,
            "stop_epoch": self.stop_epoch,
        }


def _epoch_metrics(model: CnnModel, images: np.ndarray, labels: np.ndarray,
                   l2: float, batch_size: int, start: int = 0) -> tuple[float, float]:
    """Loss/accuracy in inference mode, batched."""
    total_ce = 0.0
    correct = 0
    n = len(labels)
    for s in range(0, n, batch_size):
        xb = images[s:s + batch_size]
        yb = labels[s:s + batch_size]
        probs = model.forward(xb, training=False, start=start)
        onehot = _to_onehot(yb, probs.shape[1])
        total_ce += cross_entropy(probs, onehot) * len(yb)
        correct += int((np.argmax(probs, axis=1) == yb).sum())
    return total_ce / n + l2_penalty(model, l2), correct / n


def fit(
    model: CnnModel,
    images: np.ndarray,
    labels: np.ndarray,
    schedule: TrainSchedule,
    seed: int = 0,
    verbose: bool = False,
) -> tuple[CnnModel, TrainHistory]:
    """Epoch loop with seeded shuffling, optional validation split,
    step-decay learning rate and early stopping."""
    labels = np.asarray(labels, dtype=np.int64)
    if len(images) == 0:
        raise ValidationError("fit requires a non-empty training set")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xF17)))

    # A frozen prefix produces the same activations every epoch; run it once.
    start = model.first_trainable_index()
    if 0 < start < len(model.layers):
        images = model.extract_features(images, upto=start, batch_size=schedule.batch_size)
    else:
        start = 0

    if schedule.val_fraction > 0:
        order = rng.permutation(len(labels))
        n_val = max(1, int(round(schedule.val_fraction * len(labels))))
        if n_val >= len(labels):
            raise ValidationError("validation split leaves no training records")
        val_idx, train_idx = order[:n_val], order[n_val:]
        x_val, y_val = images[val_idx], labels[val_idx]
        x_train, y_train = images[train_idx], labels[train_idx]
    else:
        x_train, y_train = images, labels
        x_val = y_val = None

    optimizer = schedule.make_optimizer()
    history = TrainHistory()
    best_metric = -np.inf
    wait = 0

    for epoch in range(schedule.epochs):
        lr = lr_at_epoch(schedule.lr, epoch, schedule.lr_policy,
                         schedule.lr_decay_rate, schedule.lr_decay_period)
        optimizer.lr = lr
        t0 = time.perf_counter()
        order = rng.permutation(len(y_train))
        loss_sum = 0.0
        acc_sum = 0.0
        n_batches = 0
        for s in range(0, len(order), schedule.batch_size):
            sel = order[s:s + schedule.batch_size]
            step_loss, step_acc = train_step(model, optimizer, x_train[sel], y_train[sel],
                                             schedule.l2, start=start)
            loss_sum += step_loss
            acc_sum += step_acc
            n_batches += 1
        row = {
            "epoch": epoch + 1,
            "train_loss": loss_sum / n_batches,
            "train_acc": acc_sum / n_batches,
            "lr": lr,
        }
        if x_val is not None:
            val_loss, val_acc = _epoch_metrics(model, x_val, y_val, schedule.l2,
                                               schedule.batch_size, start=start)
            row["val_loss"] = val_loss
            row["val_acc"] = val_acc
        row["wall_time"] = time.perf_counter() - t0
        history.append(**row)
        if verbose:
            msg = f"epoch {row['epoch']:3d}  loss {row['train_loss']:.4f}  acc {row['train_acc']:.4f}"
            if "val_acc" in row:
                msg += f"  val_acc {row['val_acc']:.4f}"
            print(msg, flush=True)

        if schedule.early_stop is not None:
            es = schedule.early_stop
            metric = row["val_acc"] if es.monitor == "val_acc" else row["train_acc"]
            if metric > best_metric + es.min_delta:
                best_metric = metric
                wait = 0
            else:
                wait += 1
                if wait >= es.patience:
                    history.stopped_early = True
                    history.stop_epoch = epoch + 1
                    break
    return model, history
