"""Loading, validation and splitting of the per-beat CSV dataset.

File format: comma-separated, no header, one beat per row — L normalized
amplitude samples followed by one integer class label (written as int or
integral float). All beats in a file share the same L; L is a property of
the dataset, not a package constant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import FileFormatError, ValidationError
from .labels import CLASS_ORDER, ClassLabel

#: Samples may exceed [0, 1] by at most this much before loading fails.
SAMPLE_TOLERANCE = 1e-6


@dataclass(frozen=True)
class BeatRecord:
    """One fixed-length normalized beat with its class label."""

    samples: np.ndarray
    label: ClassLabel
    source_id: str | None = None

    def __post_init__(self):
        if self.samples.ndim != 1:
            raise ValidationError("beat samples must be one-dimensional")


@dataclass
class Dataset:
    """A set of equal-length beats stored as one (n, L) matrix.

    `samples` is float32 in [0, 1]; `labels` holds report-order ordinals
    (see :class:`~wvbeat.labels.ClassLabel`).
    """

    samples: np.ndarray
    labels: np.ndarray
    split_tag: str = "train"
    source_ids: list[str] | None = field(default=None, repr=False)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float32)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.samples.ndim != 2:
            raise ValidationError("dataset samples must be a 2-D (n, L) array")
        if self.samples.shape[0] != self.labels.shape[0]:
            raise ValidationError("samples and labels disagree on record count")

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def beat_length(self) -> int:
        return self.samples.shape[1]

    def __getitem__(self, i: int) -> BeatRecord:
        sid = self.source_ids[i] if self.source_ids is not None else None
        return BeatRecord(self.samples[i], ClassLabel(int(self.labels[i])), sid)

    @property
    def records(self) -> Iterator[BeatRecord]:
        for i in range(len(self)):
            yield self[i]


def load_beat_csv(path: str | Path, split_tag: str = "train") -> Dataset:
    """Parse a per-beat CSV file into a validated Dataset.

    Every row must hold L numeric sample fields plus one integral label in
    {0..4} (file convention 0=N, 1=S, 2=V, 3=F, 4=Q). Samples outside
    [0, 1] by more than 1e-6 are an error; smaller excursions are clamped.

    Raises FileFormatError for missing/unreadable files and ValidationError
    for malformed rows (the offending row index is reported).
    """
    path = Path(path)
    if not path.is_file():
        raise FileFormatError(f"beat CSV not found: {path}")
    try:
        table = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        # np.loadtxt reports the 1-based line for ragged or non-numeric rows
        raise ValidationError(f"malformed row in {path}: {exc}") from exc
    if table.size == 0:
        raise ValidationError(f"{path} contains no rows")
    if table.shape[1] < 2:
        raise ValidationError(f"{path}: rows need at least one sample and a label")

    samples = table[:, :-1]
    raw_labels = table[:, -1]

    not_integral = np.abs(raw_labels - np.round(raw_labels)) > 1e-9
    if not_integral.any():
        row = int(np.argmax(not_integral))
        raise ValidationError(f"{path} row {row}: label {raw_labels[row]!r} is not integral")
    int_labels = np.round(raw_labels).astype(np.int64)
    bad = (int_labels < 0) | (int_labels > 4)
    if bad.any():
        row = int(np.argmax(bad))
        raise ValidationError(f"{path} row {row}: unknown label {int_labels[row]}")

    out_of_range = (samples < -SAMPLE_TOLERANCE) | (samples > 1.0 + SAMPLE_TOLERANCE)
    if out_of_range.any():
        row = int(np.argwhere(out_of_range)[0, 0])
        raise ValidationError(
            f"{path} row {row}: sample value outside [0, 1] by more than {SAMPLE_TOLERANCE}"
        )
    samples = np.clip(samples, 0.0, 1.0)

    labels = _file_labels_to_ordinals(int_labels)
    return Dataset(samples=samples.astype(np.float32), labels=labels, split_tag=split_tag)


def _file_labels_to_ordinals(int_labels: np.ndarray) -> np.ndarray:
    lut = np.empty(5, dtype=np.int64)
    for file_label in range(5):
        lut[file_label] = int(ClassLabel.from_file_label(file_label))
    return lut[int_labels]


def write_beat_csv(ds: Dataset, path: str | Path) -> Path:
    """Write a Dataset back to the beat CSV format plus a JSON manifest.

    Samples are written with 9 significant digits so that a float32
    round-trip through load_beat_csv is exact. Returns the manifest path.
    """
    path = Path(path)
    file_labels = np.array([ds[i].label.file_label for i in range(len(ds))], dtype=np.int64)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for row, lab in zip(ds.samples, file_labels):
            fields = [format(float(v), ".9g") for v in row]
            fields.append(str(int(lab)))
            fh.write(",".join(fields) + "\n")
    manifest = {
        "counts": {c.code: int(n) for c, n in class_distribution(ds).items()},
        "beat_length": ds.beat_length,
        "split_tag": ds.split_tag,
        "n_records": len(ds),
    }
    manifest_path = path.with_name(path.name + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="ascii")
    return manifest_path


def class_distribution(ds: Dataset) -> dict[ClassLabel, int]:
    """Per-class record counts in report order. Counts sum to len(ds)."""
    counts = np.bincount(ds.labels, minlength=len(CLASS_ORDER))
    return {c: int(counts[int(c)]) for c in CLASS_ORDER}


def stratified_subset(ds: Dataset, cap_per_class: int, seed: int) -> Dataset:
    """Cap every class at `cap_per_class` records, sampling without replacement.

    Selection is deterministic for a fixed seed and independent per class
    (each class draws from its own child seed). Record order of the result
    follows the original dataset order.
    """
    if cap_per_class < 1:
        raise ValidationError("cap_per_class must be >= 1")
    keep: list[np.ndarray] = []
    for cls in CLASS_ORDER:
        idx = np.flatnonzero(ds.labels == int(cls))
        if idx.size > cap_per_class:
            rng = np.random.default_rng(np.random.SeedSequence((seed, int(cls))))
            idx = rng.choice(idx, size=cap_per_class, replace=False)
        keep.append(idx)
    order = np.sort(np.concatenate(keep))
    sids = [ds.source_ids[i] for i in order] if ds.source_ids is not None else None
    return Dataset(
        samples=ds.samples[order],
        labels=ds.labels[order],
        split_tag=ds.split_tag,
        source_ids=sids,
    )
