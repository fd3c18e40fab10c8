"""Raw-strip preprocessing: windowing, normalization, R-peak detection and
fixed-duration beat extraction.

The pipeline mirrors the standard per-beat preparation for lead-II strips:
split into 10 s windows, normalize each window to [0, 1], find R-peaks from
first-derivative sign changes plus amplitude thresholding, then cut a fixed
period around each peak with zero padding at the strip edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

#: Physiological minimum spacing between QRS complexes, in seconds.
REFRACTORY_S = 0.2

#: Default R-wave amplitude threshold, as a fraction of the window maximum.
DEFAULT_THRESHOLD = 0.6

#: Fraction of the beat window placed before the R-peak.
PEAK_POSITION = 1 / 3


@dataclass(frozen=True)
class EcgStrip:
    """A contiguous single-lead recording at sampling rate `fs` (Hz)."""

    samples: np.ndarray
    fs: float

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))
        if self.fs <= 0:
            raise ValidationError("sampling rate must be positive")
        if self.samples.ndim != 1:
            raise ValidationError("strip samples must be one-dimensional")

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return len(self) / self.fs


@dataclass(frozen=True)
class RPeakSet:
    """Strictly increasing R-peak sample indices and the median R-R interval.

    `median_rr` is 0.0 when fewer than two peaks were found.
    """

    indices: np.ndarray
    median_rr: float = field(default=0.0)

    def __post_init__(self):
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int64))
        if self.indices.size > 1 and not (np.diff(self.indices) > 0).all():
            raise ValidationError("peak indices must be strictly increasing")

    def __len__(self) -> int:
        return self.indices.size


def window_strip(strip: EcgStrip, window_s: float = 10.0) -> list[EcgStrip]:
    """Split a strip into consecutive non-overlapping windows.

    The final partial window is dropped; an empty strip yields no windows.
    """
    if window_s <= 0:
        raise ValidationError("window_s must be positive")
    wlen = int(round(window_s * strip.fs))
    n = len(strip) // wlen
    return [EcgStrip(strip.samples[i * wlen:(i + 1) * wlen].copy(), strip.fs) for i in range(n)]


def normalize_window(w: EcgStrip) -> tuple[EcgStrip, bool]:
    """Map amplitudes affinely onto [0, 1].

    Returns (normalized window, is_constant). A constant window cannot be
    normalized; it comes back all-zero with the flag set so callers know no
    beats are extractable from it.
    """
    if len(w) == 0:
        raise ValidationError("cannot normalize an empty window")
    lo = float(w.samples.min())
    hi = float(w.samples.max())
    if hi == lo:
        return EcgStrip(np.zeros_like(w.samples), w.fs), True
    return EcgStrip((w.samples - lo) / (hi - lo), w.fs), False


def detect_r_peaks(w: EcgStrip, threshold: float = DEFAULT_THRESHOLD) -> RPeakSet:
    """Find R-peaks in a normalized window.

    Candidates are local maxima (first-difference sign change from + to -)
    whose amplitude reaches `threshold` x the window maximum. A refractory
    period of 0.2 s is enforced by keeping the larger peak whenever two
    candidates fall closer than that (ties go to the earlier index).
    """
    x = w.samples
    if len(x) < 3:
        return RPeakSet(np.empty(0, dtype=np.int64))
    d = np.diff(x)
    candidates = np.flatnonzero((d[:-1] > 0) & (d[1:] < 0)) + 1
    if candidates.size:
        candidates = candidates[x[candidates] >= threshold * x.max()]
    if candidates.size == 0:
        return RPeakSet(np.empty(0, dtype=np.int64))

    refractory = int(round(REFRACTORY_S * w.fs))
    order = np.lexsort((candidates, -x[candidates]))  # amplitude desc, index asc
    accepted: list[int] = []
    for i in candidates[order]:
        if all(abs(int(i) - j) > refractory for j in accepted):
            accepted.append(int(i))
    indices = np.sort(np.array(accepted, dtype=np.int64))

    median_rr = float(np.median(np.diff(indices))) if indices.size >= 2 else 0.0
    return RPeakSet(indices, median_rr)


def extract_beats(w: EcgStrip, peaks: RPeakSet, beat_s: float = 1.2) -> np.ndarray:
    """Cut a fixed-duration beat around every peak.

    Each beat has exactly round(beat_s * fs) samples with the R-peak at 1/3
    of the window (P-wave before, T-wave after); samples falling outside the
    strip are zero. Returns an (n_peaks, beat_len) array. Beats are
    unlabeled; labels come from annotations, which this module does not read.
    """
    if len(peaks) == 0:
        raise ValidationError("extract_beats requires at least one peak")
    beat_len = int(round(beat_s * w.fs))
    offset = beat_len // 3
    out = np.zeros((len(peaks), beat_len), dtype=np.float64)
    n = len(w)
    for row, p in enumerate(peaks.indices):
        start = int(p) - offset
        lo = max(start, 0)
        hi = min(start + beat_len, n)
        if hi > lo:
            out[row, lo - start:hi - start] = w.samples[lo:hi]
    return out


def beat_alignment_offset(beat_len: int) -> int:
    """Index of the R-peak inside an extracted beat of length `beat_len`."""
    return beat_len // 3


def resample_strip(strip: EcgStrip, target_fs: float) -> EcgStrip:
    """Resample to `target_fs` with an anti-alias low-pass, deterministically.

    Downsampling first applies a Hamming-windowed-sinc FIR low-pass with
    cutoff at the target Nyquist (62.5 Hz for 360 -> 125 Hz), then linear
    interpolation onto the new uniform grid. Output is clamped to the input
    amplitude range so filter ringing cannot push a [0, 1] beat outside it.
    """
    if target_fs <= 0:
        raise ValidationError("target_fs must be positive")
    if target_fs == strip.fs or len(strip) < 2:
        return EcgStrip(strip.samples.copy(), target_fs if len(strip) < 2 else strip.fs)

    x = strip.samples
    if target_fs < strip.fs:
        x = _windowed_sinc_lowpass(x, cutoff_hz=target_fs / 2.0, fs=strip.fs)

    duration = len(strip) / strip.fs
    n_out = int(round(duration * target_fs))
    t_in = np.arange(len(strip)) / strip.fs
    t_out = np.arange(n_out) / target_fs
    y = np.interp(t_out, t_in, x)
    y = np.clip(y, strip.samples.min(), strip.samples.max())
    return EcgStrip(y, target_fs)


def _windowed_sinc_lowpass(x: np.ndarray, cutoff_hz: float, fs: float, numtaps: int = 101) -> np.ndarray:
    """Zero-phase FIR low-pass: Hamming-windowed sinc, applied via 'same' convolution."""
    if numtaps % 2 == 0:
        numtaps += 1
    m = np.arange(numtaps) - (numtaps - 1) / 2
    fc = cutoff_hz / fs  # normalized cutoff in cycles/sample
    taps = 2 * fc * np.sinc(2 * fc * m)
    taps *= np.hamming(numtaps)
    taps /= taps.sum()
    return np.convolve(x, taps, mode="same")
