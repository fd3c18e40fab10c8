"""Synthetic five-class beat generator for demos and data-free testing.

Real per-beat files are not shipped with the package; these waveforms are
morphology sketches (not physiologically accurate) with deterministic
per-record jitter, distinct enough that the full transform + training
pipeline can be exercised end to end.
"""

from __future__ import annotations

import numpy as np

from .ingest import Dataset
from .labels import CLASS_ORDER, ClassLabel
from .segmentation import EcgStrip

DEFAULT_BEAT_LENGTH = 187
DEFAULT_FS = 125.0


def _bump(t: np.ndarray, center: float, width: float, height: float) -> np.ndarray:
    return height * np.exp(-0.5 * ((t - center) / width) ** 2)


def _beat_waveform(cls: ClassLabel, t: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One jittered waveform on the unit interval grid t."""
    j = lambda s: 1.0 + rng.normal(0.0, s)  # noqa: E731 - local jitter helper
    r_pos = 0.33 + rng.normal(0.0, 0.01)
    y = np.zeros_like(t)
    if cls is ClassLabel.N:
        y += _bump(t, r_pos - 0.14 * j(0.05), 0.025, 0.15 * j(0.1))   # P
        y += _bump(t, r_pos, 0.012 * j(0.05), 1.0)                    # narrow R
        y -= _bump(t, r_pos + 0.03, 0.010, 0.18 * j(0.1))             # S dip
        y += _bump(t, r_pos + 0.22 * j(0.05), 0.05, 0.30 * j(0.1))    # T
    elif cls is ClassLabel.S:
        # early, P absent, narrow complex, flattened T
        y += _bump(t, r_pos - 0.05, 0.012 * j(0.05), 0.95)
        y += _bump(t, r_pos + 0.12 * j(0.05), 0.04, 0.15 * j(0.1))
        y += _bump(t, r_pos + 0.45 * j(0.03), 0.012, 0.85)            # next beat intrudes
    elif cls is ClassLabel.V:
        # wide bizarre complex, no P, discordant (inverted) T
        y += _bump(t, r_pos, 0.055 * j(0.08), 1.0)
        y -= _bump(t, r_pos + 0.16 * j(0.05), 0.06, 0.35 * j(0.1))
    elif cls is ClassLabel.F:
        # fusion: average of a normal and a ventricular shape
        y += 0.5 * _bump(t, r_pos, 0.012 * j(0.05), 1.0)
        y += 0.5 * _bump(t, r_pos, 0.045 * j(0.08), 0.9)
        y += _bump(t, r_pos - 0.14, 0.025, 0.08 * j(0.2))
        y += _bump(t, r_pos + 0.20, 0.05, 0.12 * j(0.2))
    else:  # Q: paced-like, sharp spike then broad slow wave
        y += _bump(t, r_pos - 0.02, 0.004, 0.9)
        y += _bump(t, r_pos + 0.10 * j(0.05), 0.10 * j(0.1), 0.55 * j(0.1))
    y += rng.normal(0.0, 0.01, size=t.shape)
    lo, hi = float(y.min()), float(y.max())
    return (y - lo) / (hi - lo) if hi > lo else np.zeros_like(y)


def make_beats(
    counts: dict[ClassLabel, int],
    seed: int = 0,
    beat_length: int = DEFAULT_BEAT_LENGTH,
    split_tag: str = "train",
) -> Dataset:
    """Generate a Dataset with the requested per-class counts."""
    t = np.linspace(0.0, 1.0, beat_length)
    rows: list[np.ndarray] = []
    labels: list[int] = []
    for cls in CLASS_ORDER:
        n = counts.get(cls, 0)
        rng = np.random.default_rng(np.random.SeedSequence((seed, int(cls))))
        for _ in range(n):
            rows.append(_beat_waveform(cls, t, rng).astype(np.float32))
            labels.append(int(cls))
    return Dataset(
        samples=np.stack(rows) if rows else np.zeros((0, beat_length), dtype=np.float32),
        labels=np.array(labels, dtype=np.int64),
        split_tag=split_tag,
    )


def make_balanced_beats(
    per_class: int, seed: int = 0, beat_length: int = DEFAULT_BEAT_LENGTH, split_tag: str = "train"
) -> Dataset:
    return make_beats({c: per_class for c in CLASS_ORDER}, seed, beat_length, split_tag)


def make_strip(
    r_positions_s,
    duration_s: float = 10.0,
    fs: float = DEFAULT_FS,
    seed: int = 0,
) -> EcgStrip:
    """A strip of normal-shaped beats centered at given R times (seconds)."""
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * fs))
    t = np.arange(n) / fs
    y = np.zeros(n)
    for r_s in r_positions_s:
        y += _bump(t, r_s - 0.17, 0.03, 0.15)
        y += _bump(t, r_s, 0.012, 1.0)
        y += _bump(t, r_s + 0.25, 0.06, 0.3)
    y += rng.normal(0.0, 0.005, size=n)
    return EcgStrip(y, fs)
