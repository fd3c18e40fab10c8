"""Wigner-Ville time-frequency images and the coordinate ramp.

A 1-D beat becomes the CNN's 2-D input in five steps: resample to 128
samples, take the analytic signal, compute the discrete pseudo-WVD
(128 x 128), normalize the image to [0, 1], then add a linear ramp along
the time axis that re-injects the positional information convolution would
otherwise discard.

Discrete WVD conventions used throughout:

* integer-lag kernel ``K[m, n] = x[n+m] * conj(x[n-m])`` over lags
  ``|m| <= min(n, N-1-n, N//2 - 1)``, zero outside that support;
* DFT over the lag axis with the analysis sign ``exp(-j*2*pi*k*m/N)``;
* rows are frequency bins. Because the lag step is 1 (not 1/2), the
  frequency axis spans twice the signal band: a pure tone at bin f0
  appears at bin 2*f0.

The kernel is conjugate-symmetric in m for every n, so the transform is
real up to rounding; the real part is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError

#: Ramp height at the last time column, as tuned against the CNN.
DEFAULT_RAMP_STRENGTH = 0.25

#: Native side length of the model's input images.
IMAGE_SIZE = 128


@dataclass(frozen=True)
class WvdImage:
    """A real 2-D time-frequency matrix: rows = frequency bins, cols = time."""

    values: np.ndarray
    fs: float = 125.0
    ramp_strength: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values)
        object.__setattr__(self, "values", v)
        if v.ndim != 2:
            raise ValidationError("WvdImage values must be 2-D")
        if not np.isfinite(v).all():
            raise ValidationError("WvdImage values must be finite")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def resample_beat(x: np.ndarray, n: int = IMAGE_SIZE) -> np.ndarray:
    """Linearly resample a beat onto a uniform grid of length n.

    Endpoints are preserved; n == len(x) is the identity.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValidationError("resample_beat needs a 1-D vector of length >= 2")
    if n < 2:
        raise ValidationError("target length must be >= 2")
    if n == x.size:
        return x.copy()
    src = np.arange(x.size, dtype=np.float64)
    dst = np.linspace(0.0, x.size - 1, n)
    return np.interp(dst, src, x)


def analytic_signal(x: np.ndarray) -> np.ndarray:
    """Discrete analytic signal: negative-frequency DFT bins zeroed.

    DC and Nyquist keep unit weight, strictly positive frequencies are
    doubled. Odd-length inputs are zero-padded by one sample first. The
    real part of the output equals the (padded) input.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValidationError("analytic_signal needs a 1-D real vector")
    if x.size % 2 == 1:
        x = np.concatenate([x, [0.0]])
    n = x.size
    spectrum = np.fft.fft(x)
    w = np.zeros(n)
    w[0] = 1.0
    w[n // 2] = 1.0
    w[1:n // 2] = 2.0
    return np.fft.ifft(spectrum * w)


def wvd_matrix(z: np.ndarray) -> np.ndarray:
    """Discrete pseudo-WVD of a complex vector, as an (N, N) real matrix.

    FFT-based evaluation of the lag-kernel definition (see module
    docstring). The imaginary residue is checked against 1e-9 relative and
    discarded.
    """
    z = np.asarray(z, dtype=np.complex128)
    n = z.size
    if n < 2:
        raise ValidationError("wvd_matrix needs a vector of length >= 2")
    t = np.arange(n)
    taumax = np.minimum(np.minimum(t, n - 1 - t), n // 2 - 1)
    m = np.arange(-(n // 2 - 1), n // 2)  # all lags that can ever occur
    mm, tt = np.meshgrid(m, t, indexing="ij")
    valid = np.abs(mm) <= taumax[None, :]
    ip = np.clip(tt + mm, 0, n - 1)
    im = np.clip(tt - mm, 0, n - 1)
    kernel = np.zeros((n, n), dtype=np.complex128)
    rows = np.mod(mm, n)
    kernel[rows[valid], tt[valid]] = z[ip[valid]] * np.conj(z[im[valid]])

    spectrum = np.fft.fft(kernel, axis=0)
    scale = float(np.max(np.abs(spectrum)))
    if scale > 0 and float(np.max(np.abs(spectrum.imag))) > 1e-9 * scale:
        raise ValidationError("WVD imaginary residue exceeded tolerance")
    return spectrum.real


def wvd_matrix_direct(z: np.ndarray) -> np.ndarray:
    """O(N^3) double-sum evaluation of the same definition as wvd_matrix.

    Independent oracle: no FFT, no vectorized kernel assembly. Intended for
    small N only.
    """
    z = np.asarray(z, dtype=np.complex128)
    n = z.size
    out = np.zeros((n, n), dtype=np.float64)
    for col in range(n):
        taumax = min(col, n - 1 - col, n // 2 - 1)
        for k in range(n):
            acc = 0.0 + 0.0j
            for m in range(-taumax, taumax + 1):
                acc += z[col + m] * np.conj(z[col - m]) * np.exp(-2j * np.pi * k * m / n)
            out[k, col] = acc.real
    return out


def compute_wvd(x: np.ndarray, fs: float = 125.0) -> WvdImage:
    """Wrap wvd_matrix of a complex vector into a WvdImage (ramp-free)."""
    return WvdImage(wvd_matrix(x), fs=fs, ramp_strength=0.0)


def normalize_unit_range(values: np.ndarray) -> np.ndarray:
    """Affine map onto [0, 1]; a constant array maps to all-zero."""
    lo = float(values.min())
    hi = float(values.max())
    if hi == lo:
        return np.zeros_like(values, dtype=np.float64)
    return (values - lo) / (hi - lo)


def normalize_image(img: WvdImage) -> WvdImage:
    """Per-image [0, 1] normalization so a fixed ramp strength is meaningful."""
    return replace(img, values=normalize_unit_range(img.values))


def ramp_matrix(rows: int, cols: int, strength: float) -> np.ndarray:
    """The additive ramp image: column c carries strength * c / (cols - 1)."""
    if cols < 2:
        raise ValidationError("ramp needs at least two time columns")
    ramp = strength * (np.arange(cols, dtype=np.float64) / (cols - 1))
    return np.broadcast_to(ramp, (rows, cols)).copy()


def add_coordinate_ramp(img: WvdImage, strength: float = DEFAULT_RAMP_STRENGTH) -> WvdImage:
    """Add a linear time-axis gradient; the last column gains exactly `strength`."""
    if strength < 0:
        raise ValidationError("ramp strength must be >= 0")
    rows, cols = img.shape
    values = img.values + ramp_matrix(rows, cols, strength)
    return replace(img, values=values, ramp_strength=img.ramp_strength + strength)


def resize_image(img: WvdImage, rows: int = IMAGE_SIZE, cols: int = IMAGE_SIZE) -> WvdImage:
    """Bilinear resize with corner alignment (corner values are preserved)."""
    src = img.values
    if src.shape[0] < 2 or src.shape[1] < 2:
        raise ValidationError("resize needs a source of at least 2x2")
    if src.shape == (rows, cols):
        return replace(img, values=src.copy())
    r_pos = np.linspace(0.0, src.shape[0] - 1, rows)
    c_pos = np.linspace(0.0, src.shape[1] - 1, cols)
    r0 = np.minimum(np.floor(r_pos).astype(np.int64), src.shape[0] - 2)
    c0 = np.minimum(np.floor(c_pos).astype(np.int64), src.shape[1] - 2)
    ra = (r_pos - r0)[:, None]
    ca = (c_pos - c0)[None, :]
    out = (
        src[np.ix_(r0, c0)] * (1 - ra) * (1 - ca)
        + src[np.ix_(r0 + 1, c0)] * ra * (1 - ca)
        + src[np.ix_(r0, c0 + 1)] * (1 - ra) * ca
        + src[np.ix_(r0 + 1, c0 + 1)] * ra * ca
    )
    return replace(img, values=out)


def beat_to_image(
    beat: np.ndarray,
    *,
    size: int = IMAGE_SIZE,
    ramp_strength: float = DEFAULT_RAMP_STRENGTH,
    analytic: bool = True,
    fs: float = 125.0,
) -> np.ndarray:
    """Full per-beat transform: resample -> (analytic) -> WVD -> [0,1] -> ramp.

    Returns a float32 (size, size) matrix. `analytic=False` computes the WVD
    of the raw real signal instead (cross-terms around DC included).
    """
    x = resample_beat(np.asarray(beat, dtype=np.float64), size)
    z = analytic_signal(x) if analytic else x.astype(np.complex128)
    img = wvd_matrix(z)
    img = normalize_unit_range(img)
    if ramp_strength > 0:
        img = img + ramp_matrix(size, size, ramp_strength)
    return img.astype(np.float32)


def transform_beats(
    samples: np.ndarray,
    *,
    size: int = IMAGE_SIZE,
    ramp_strength: float = DEFAULT_RAMP_STRENGTH,
    analytic: bool = True,
    fs: float = 125.0,
    workers: int = 1,
) -> np.ndarray:
    """Transform a (B, L) beat matrix into (B, size, size) float32 images.

    Beats are independent; with workers > 1 they are processed in a process
    pool with deterministic output ordering.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2:
        raise ValidationError("transform_beats expects a (B, L) matrix")
    kwargs = dict(size=size, ramp_strength=ramp_strength, analytic=analytic, fs=fs)
    out = np.empty((samples.shape[0], size, size), dtype=np.float32)
    if workers <= 1 or samples.shape[0] < 4:
        for i, beat in enumerate(samples):
            out[i] = beat_to_image(beat, **kwargs)
        return out

    import concurrent.futures as cf
    from functools import partial

    fn = partial(_transform_one, **kwargs)
    with cf.ProcessPoolExecutor(max_workers=workers) as pool:
        for i, img in enumerate(pool.map(fn, samples, chunksize=64)):
            out[i] = img
    return out


def _transform_one(beat, **kwargs):
    return beat_to_image(beat, **kwargs)
