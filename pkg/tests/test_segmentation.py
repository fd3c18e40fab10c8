import numpy as np
import pytest

from wvbeat.errors import ValidationError
from wvbeat.segmentation import (
    EcgStrip,
    RPeakSet,
    beat_alignment_offset,
    detect_r_peaks,
    extract_beats,
    normalize_window,
    resample_strip,
    window_strip,
)
from wvbeat.synthetic import make_strip


def spike_train(fs=125.0, period=125, n_spikes=9, amplitude=1.0):
    """Unit spikes every `period` samples, first at index `period`."""
    length = period * (n_spikes + 1) + 10
    x = np.zeros(length)
    for k in range(1, n_spikes + 1):
        x[k * period] = amplitude
    return EcgStrip(x, fs)


def test_window_exact_division():
    strip = EcgStrip(np.arange(3 * 3600, dtype=float), 360.0)
    windows = window_strip(strip, 10.0)
    assert len(windows) == 3
    assert all(len(w) == 3600 for w in windows)
    assert np.array_equal(windows[1].samples, strip.samples[3600:7200])


def test_window_remainder_dropped():
    strip = EcgStrip(np.zeros(int(25 * 360)), 360.0)
    assert len(window_strip(strip, 10.0)) == 2


def test_window_empty_strip():
    assert window_strip(EcgStrip(np.zeros(0), 125.0), 10.0) == []


def test_normalize_affine():
    out, constant = normalize_window(EcgStrip(np.array([2.0, 4.0, 6.0]), 10.0))
    assert not constant
    assert np.allclose(out.samples, [0.0, 0.5, 1.0])


def test_normalize_constant_flags():
    out, constant = normalize_window(EcgStrip(np.full(5, 5.0), 10.0))
    assert constant
    assert np.array_equal(out.samples, np.zeros(5))


def test_normalize_idempotent(rng):
    w = EcgStrip(rng.normal(size=200), 125.0)
    once, _ = normalize_window(w)
    twice, _ = normalize_window(once)
    assert np.allclose(once.samples, twice.samples, atol=1e-12)


def test_detect_spike_train_positions():
    strip = spike_train()
    peaks = detect_r_peaks(strip, threshold=0.5)
    assert np.array_equal(peaks.indices, np.arange(1, 10) * 125)
    assert peaks.median_rr == 125


def test_detect_monotone_ramp_no_peaks():
    peaks = detect_r_peaks(EcgStrip(np.linspace(0, 1, 500), 125.0), 0.5)
    assert len(peaks) == 0
    assert peaks.median_rr == 0.0


def test_threshold_rejects_small_spikes():
    fs, period = 125.0, 125
    x = np.zeros(1500)
    big = [125, 375, 625, 875]
    small = [250, 500, 750]
    for i in big:
        x[i] = 1.0
    for i in small:
        x[i] = 0.3
    peaks = detect_r_peaks(EcgStrip(x, fs), threshold=0.5)
    # oracle: brute-force local maxima above threshold
    expected = sorted(big)
    assert list(peaks.indices) == expected


def test_refractory_suppresses_close_peaks():
    x = np.zeros(1000)
    x[300] = 1.0
    x[310] = 0.9  # within 0.2 s at fs=125 (25 samples)
    x[600] = 1.0
    peaks = detect_r_peaks(EcgStrip(x, 125.0), threshold=0.5)
    assert list(peaks.indices) == [300, 600]


def test_detect_invariant_under_affine_rescale(rng):
    strip = make_strip([1.1, 2.0, 2.9, 3.8, 4.9, 6.0, 7.2, 8.1, 9.0], seed=3)
    normalized, _ = normalize_window(strip)
    base = detect_r_peaks(normalized)
    scaled = EcgStrip(5.0 * strip.samples + 2.0, strip.fs)
    renorm, _ = normalize_window(scaled)
    again = detect_r_peaks(renorm)
    assert np.array_equal(base.indices, again.indices)


def test_extract_edge_padding():
    fs = 125.0
    w = EcgStrip(np.ones(1000), fs)
    peaks = RPeakSet(np.array([0]), 0.0)
    beats = extract_beats(w, peaks, beat_s=1.2)
    assert beats.shape == (1, 150)
    offset = beat_alignment_offset(150)
    assert np.array_equal(beats[0, :offset], np.zeros(offset))
    assert np.array_equal(beats[0, offset:], np.ones(150 - offset))


def test_extract_mid_strip_verbatim(rng):
    fs = 125.0
    samples = rng.random(2000)
    w = EcgStrip(samples, fs)
    p = 900
    beats = extract_beats(w, RPeakSet(np.array([p]), 0.0), beat_s=1.2)
    offset = beat_alignment_offset(150)
    assert np.array_equal(beats[0], samples[p - offset:p - offset + 150])


def test_extract_spike_alignment():
    strip = spike_train()
    peaks = detect_r_peaks(strip, 0.5)
    beats = extract_beats(strip, peaks, beat_s=1.2)
    offset = beat_alignment_offset(150)
    assert beats.shape[1] == 150
    # oracle: spikes were placed at known positions, so every beat's max
    # sits exactly at the alignment offset
    assert np.all(np.argmax(beats, axis=1) == offset)


def test_extract_constant_length():
    strip = spike_train(n_spikes=5)
    peaks = detect_r_peaks(strip, 0.5)
    beats = extract_beats(strip, peaks, beat_s=1.2)
    assert beats.shape == (5, 150)


def test_extract_requires_peaks():
    with pytest.raises(ValidationError):
        extract_beats(EcgStrip(np.zeros(100), 125.0), RPeakSet(np.array([], dtype=int)), 1.2)


def test_resample_identity_when_same_fs():
    strip = EcgStrip(np.linspace(0, 1, 100), 125.0)
    out = resample_strip(strip, 125.0)
    assert np.array_equal(out.samples, strip.samples)


def test_resample_downsamples_and_stays_in_range():
    strip = make_strip([1.0, 2.0, 3.0, 4.0], duration_s=5.0, fs=360.0, seed=9)
    normalized, _ = normalize_window(strip)
    beat = EcgStrip(normalized.samples[: int(1.2 * 360)], 360.0)
    out = resample_strip(beat, 125.0)
    assert len(out) == round(1.2 * 125)
    assert out.samples.min() >= 0.0
    assert out.samples.max() <= 1.0


def test_resample_preserves_tone():
    fs, target = 360.0, 125.0
    t = np.arange(int(fs * 4)) / fs
    x = np.sin(2 * np.pi * 5.0 * t)  # 5 Hz, far below the 62.5 Hz cutoff
    out = resample_strip(EcgStrip(x, fs), target)
    t_new = np.arange(len(out)) / target
    expected = np.sin(2 * np.pi * 5.0 * t_new)
    core = slice(50, len(out) - 50)
    assert np.max(np.abs(out.samples[core] - expected[core])) < 0.02


def test_strip_validation():
    with pytest.raises(ValidationError):
        EcgStrip(np.zeros(10), fs=0.0)
    with pytest.raises(ValidationError):
        RPeakSet(np.array([5, 3]))
