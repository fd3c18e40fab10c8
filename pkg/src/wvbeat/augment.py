"""Minority-class balancing by Gaussian-noise copies or plain repetition.

The deficit for a class of size s balanced up to a target t is filled by
augmenting source record (i mod s) for i = 0..t-s-1, so every original
contributes as evenly as possible. Surplus classes are down-sampled without
replacement. Per-record noise draws from a child seed derived from
(seed, class, index), making generation order-independent and parallel-safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .ingest import BeatRecord, Dataset
from .labels import CLASS_ORDER

#: Noise ceiling as a fraction of the beat's peak amplitude.
DEFAULT_NOISE_FRACTION = 0.10


@dataclass(frozen=True)
class AugmentPlan:
    target_count: int
    mode: str = "noise"  # "noise" | "repeat"
    noise_fraction: float = DEFAULT_NOISE_FRACTION
    seed: int = 0

    def __post_init__(self):
        if self.target_count < 1:
            raise ValidationError("target_count must be >= 1")
        if not 0.0 <= self.noise_fraction <= 1.0:
            raise ValidationError("noise_fraction must lie in [0, 1]")
        if self.mode not in ("noise", "repeat"):
            raise ValidationError(f"unknown augment mode {self.mode!r}")


def gaussian_noise_copy(samples: np.ndarray, noise_fraction: float, seed) -> np.ndarray:
    """One noisy copy of a beat, bounded by `noise_fraction` of its peak.

    Noise is zero-mean Gaussian with sigma = fraction * peak / 3 (so the
    bound is the 3-sigma point), hard-clipped at +/- fraction * peak per
    sample; the result is clamped back into [0, 1]. Deterministic per seed.
    """
    samples = np.asarray(samples, dtype=np.float64)
    peak = float(samples.max()) if samples.size else 0.0
    ceiling = noise_fraction * peak
    if ceiling == 0.0:
        return samples.astype(np.float32)
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, ceiling / 3.0, size=samples.shape)
    noise = np.clip(noise, -ceiling, ceiling)
    return np.clip(samples + noise, 0.0, 1.0).astype(np.float32)


def gaussian_augment(beat: BeatRecord, noise_fraction: float = DEFAULT_NOISE_FRACTION, seed=0) -> BeatRecord:
    """Record-level wrapper around gaussian_noise_copy; the label is preserved."""
    return BeatRecord(
        samples=gaussian_noise_copy(beat.samples, noise_fraction, seed),
        label=beat.label,
        source_id=beat.source_id,
    )


def record_seed(seed: int, class_ordinal: int, index: int) -> np.random.SeedSequence:
    """Stable child seed for augmented record `index` of one class."""
    return np.random.SeedSequence((seed, class_ordinal, index))


def balance_classes(ds: Dataset, plan: AugmentPlan) -> Dataset:
    """Bring every class to exactly plan.target_count records.

    Originals are kept (all of them for deficit classes, a seeded subset for
    surplus classes); augmented rows are appended after the originals in
    modulo source order.
    """
    target = plan.target_count
    out_samples: list[np.ndarray] = []
    out_labels: list[np.ndarray] = []
    for cls in CLASS_ORDER:
        idx = np.flatnonzero(ds.labels == int(cls))
        if idx.size == 0:
            raise ValidationError(f"class {cls.code} has no records to balance from")
        if idx.size > target:
            rng = np.random.default_rng(np.random.SeedSequence((plan.seed, int(cls))))
            idx = np.sort(rng.choice(idx, size=target, replace=False))
            block = ds.samples[idx]
        elif idx.size < target:
            deficit = target - idx.size
            src = ds.samples[idx]
            extra = np.empty((deficit, ds.beat_length), dtype=np.float32)
            for i in range(deficit):
                source_row = src[i % idx.size]
                if plan.mode == "repeat" or plan.noise_fraction == 0.0:
                    extra[i] = source_row
                else:
                    extra[i] = gaussian_noise_copy(
                        source_row, plan.noise_fraction, record_seed(plan.seed, int(cls), i)
                    )
            block = np.concatenate([src, extra], axis=0)
        else:
            block = ds.samples[idx]
        out_samples.append(block)
        out_labels.append(np.full(target, int(cls), dtype=np.int64))
    return Dataset(
        samples=np.concatenate(out_samples, axis=0),
        labels=np.concatenate(out_labels),
        split_tag=ds.split_tag,
    )
