"""Confusion matrix and per-class precision / recall / F1 reporting.

Classes are reported alphabetically (F, N, Q, S, V). All 0/0 metric cases
are defined as 0. The text report mimics the usual classification-report
layout: four decimal places, per-class rows, then accuracy, macro avg and
weighted avg.
"""

from __future__ import annotations

from dataclasses import dataclass
from io import StringIO

import numpy as np

from .errors import ValidationError
from .labels import CLASS_CODES, CLASS_ORDER, ClassLabel


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[i, j] = number of records with true class i predicted as j."""

    counts: np.ndarray
    classes: tuple[str, ...] = CLASS_CODES

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", c)
        if not isinstance(self.classes, tuple):
            object.__setattr__(self, "classes", tuple(self.classes))
        k = len(self.classes)
        if c.shape != (k, k):
            raise ValidationError(f"confusion matrix must be {k}x{k}")
        if (c < 0).any():
            raise ValidationError("confusion matrix counts must be non-negative")

    @property
    def support(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.classes != other.classes:
            raise ValidationError("cannot merge confusion matrices over different classes")
        return ConfusionMatrix(self.counts + other.counts, self.classes)

    def to_csv(self) -> str:
        out = StringIO()
        out.write("true\\pred," + ",".join(self.classes) + "\n")
        for code, row in zip(self.classes, self.counts):
            out.write(code + "," + ",".join(str(int(v)) for v in row) + "\n")
        return out.getvalue()


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class MetricsReport:
    per_class: dict[str, ClassMetrics]
    accuracy: float
    macro_avg: ClassMetrics
    weighted_avg: ClassMetrics

    @property
    def total_support(self) -> int:
        return self.weighted_avg.support

    def to_dict(self) -> dict:
        def row(m: ClassMetrics) -> dict:
            return {
                "precision": m.precision,
                "recall": m.recall,
                "f1": m.f1,
                "support": m.support,
            }

        return {
            "classes": {code: row(m) for code, m in self.per_class.items()},
            "accuracy": self.accuracy,
            "macro_avg": row(self.macro_avg),
            "weighted_avg": row(self.weighted_avg),
        }

    def format_table(self) -> str:
        """Aligned text table, four decimals, like a classification report."""
        lines = [f"{'':>12} {'precision':>9} {'recall':>9} {'f1-score':>9} {'support':>9}", ""]
        for code, m in self.per_class.items():
            lines.append(
                f"{code:>12} {m.precision:>9.4f} {m.recall:>9.4f} {m.f1:>9.4f} {m.support:>9d}"
            )
        lines.append("")
        lines.append(
            f"{'accuracy':>12} {'':>9} {'':>9} {self.accuracy:>9.4f} {self.total_support:>9d}"
        )
        for name, m in (("macro avg", self.macro_avg), ("weighted avg", self.weighted_avg)):
            lines.append(
                f"{name:>12} {m.precision:>9.4f} {m.recall:>9.4f} {m.f1:>9.4f} {m.support:>9d}"
            )
        return "\n".join(lines) + "\n"


def confusion_matrix(
    true_labels,
    predicted_labels,
    classes: tuple[str, ...] = CLASS_CODES,
) -> ConfusionMatrix:
    """Count (true, predicted) pairs. Labels are ClassLabel values/ordinals."""
    t = np.asarray([int(v) for v in true_labels], dtype=np.int64)
    p = np.asarray([int(v) for v in predicted_labels], dtype=np.int64)
    if t.shape != p.shape:
        raise ValidationError("true and predicted label sequences differ in length")
    if t.size == 0:
        raise ValidationError("cannot build a confusion matrix from no labels")
    k = len(classes)
    lut = np.full(len(CLASS_ORDER), -1, dtype=np.int64)
    for i, code in enumerate(classes):
        lut[int(ClassLabel.from_code(code))] = i
    ti, pi = lut[t], lut[p]
    if (ti < 0).any() or (pi < 0).any():
        raise ValidationError("labels outside the requested class set")
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (ti, pi), 1)
    return ConfusionMatrix(counts, classes)


def _build_report(
    codes: tuple[str, ...],
    tp: np.ndarray,
    support: np.ndarray,
    predicted: np.ndarray,
    total: int,
    correct: int,
) -> MetricsReport:
    recall = _safe_div(tp, support)
    precision = _safe_div(tp, predicted)
    f1 = _safe_div(2 * precision * recall, precision + recall)
    accuracy = correct / total if total else 0.0
    per_class = {
        code: ClassMetrics(float(precision[i]), float(recall[i]), float(f1[i]), int(support[i]))
        for i, code in enumerate(codes)
    }
    macro = ClassMetrics(float(precision.mean()), float(recall.mean()), float(f1.mean()), total)
    w = support / total if total else np.zeros_like(support)
    weighted = ClassMetrics(
        float((precision * w).sum()), float((recall * w).sum()), float((f1 * w).sum()), total
    )
    return MetricsReport(per_class, float(accuracy), macro, weighted)


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num, dtype=np.float64)
    np.divide(num, den, out=out, where=den > 0)
    return out


def per_class_metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Precision/recall/F1 per class plus accuracy, macro and weighted rows.

    recall_i = TP_i / (TP_i + FN_i), precision_i = TP_i / (TP_i + FP_i),
    F1_i = 2PR / (P + R); every 0/0 is 0. Macro is the unweighted mean,
    weighted is the support-weighted mean. Accuracy is trace / total.
    """
    counts = cm.counts
    tp = np.diag(counts).astype(np.float64)
    support = counts.sum(axis=1).astype(np.float64)
    predicted = counts.sum(axis=0).astype(np.float64)
    return _build_report(cm.classes, tp, support, predicted, cm.total, int(tp.sum()))


def evaluate_predictions(true_labels, predicted_labels, *, drop_q: bool = False) -> MetricsReport:
    """Metrics over a label/prediction pair, optionally discarding Q records.

    With drop_q, records whose true class is Q are removed and the report
    covers the remaining four classes. A surviving prediction of Q counts
    against its true class's recall but appears in no precision column.
    """
    t = np.asarray([int(v) for v in true_labels], dtype=np.int64)
    p = np.asarray([int(v) for v in predicted_labels], dtype=np.int64)
    if t.shape != p.shape:
        raise ValidationError("true and predicted label sequences differ in length")
    if not drop_q:
        return per_class_metrics(confusion_matrix(t, p))

    keep = t != int(ClassLabel.Q)
    t, p = t[keep], p[keep]
    if t.size == 0:
        raise ValidationError("no records left to evaluate after dropping Q")
    codes = tuple(c for c in CLASS_CODES if c != "Q")
    ordinals = np.array([int(ClassLabel.from_code(c)) for c in codes])
    tp = np.array([np.sum((t == o) & (p == o)) for o in ordinals], dtype=np.float64)
    support = np.array([np.sum(t == o) for o in ordinals], dtype=np.float64)
    predicted = np.array([np.sum(p == o) for o in ordinals], dtype=np.float64)
    return _build_report(codes, tp, support, predicted, int(t.size), int(tp.sum()))


def evaluate(
    model,
    images: np.ndarray,
    labels,
    *,
    drop_q: bool = False,
    batch_size: int = 256,
) -> MetricsReport:
    """Run a trained model over a test image set and report metrics.

    Ramp / no-ramp ablation is a transform-time choice and must already be
    baked into `images` (consistently with how the model was trained).
    """
    labels = np.asarray([int(v) for v in labels], dtype=np.int64)
    preds = predict_batches(model, images, batch_size=batch_size)
    return evaluate_predictions(labels, preds, drop_q=drop_q)


def predict_batches(model, images: np.ndarray, *, batch_size: int = 256) -> np.ndarray:
    """Argmax predictions over an image set, evaluated in inference mode."""
    preds = np.empty(len(images), dtype=np.int64)
    for start in range(0, len(images), batch_size):
        batch = images[start:start + batch_size]
        probs = model.forward(batch, training=False)
        preds[start:start + len(batch)] = np.argmax(probs, axis=1)
    return preds
