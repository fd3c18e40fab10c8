#!/usr/bin/env python3
"""From a 1-D beat to the CNN's 2-D input, one stage at a time.

Generates one synthetic beat per class, walks it through resample ->
analytic signal -> Wigner-Ville image -> [0,1] normalization -> coordinate
ramp, and writes a PNG per class into ./out/wvd_images/.
"""

import numpy as np

from wvbeat.labels import CLASS_ORDER
from wvbeat.synthetic import make_balanced_beats
from wvbeat.tensorio import write_png_gray
from wvbeat.tfr import (
    add_coordinate_ramp,
    analytic_signal,
    compute_wvd,
    normalize_image,
    resample_beat,
)
from pathlib import Path

out_dir = Path(__file__).parent / "out" / "wvd_images"
out_dir.mkdir(parents=True, exist_ok=True)

ds = make_balanced_beats(per_class=1, seed=42)

for i in range(len(ds)):
    record = ds[i]
    beat = record.samples.astype(np.float64)
    print(f"\nclass {record.label.code}: beat of {beat.size} samples, "
          f"peak {beat.max():.3f} at index {int(np.argmax(beat))}")

    # 1. bring the beat onto the 128-sample grid the model expects
    x = resample_beat(beat, 128)

    # 2. analytic signal: kills the negative-frequency half of the spectrum
    #    so the quadratic transform below has no cross-terms around DC
    z = analytic_signal(x)
    print(f"  analytic signal: max |imag| = {np.abs(z.imag).max():.3f}, "
          f"real part == resampled beat: {np.allclose(z.real, x)}")

    # 3. Wigner-Ville image, 128 x 128 (rows = frequency bins)
    img = compute_wvd(z, fs=125.0)
    col_energy = img.values.sum(axis=0)
    print(f"  WVD: shape {img.shape}, time-marginal tracks |x|^2: "
          f"{np.allclose(col_energy, 128 * np.abs(z) ** 2)}")

    # 4. normalize to [0,1], then tilt time into the pixel values
    img = normalize_image(img)
    img = add_coordinate_ramp(img, 0.25)
    print(f"  after ramp: min {img.values.min():.3f}, max {img.values.max():.3f} "
          f"(last column carries +0.25)")

    png = out_dir / f"wvd_{record.label.code}.png"
    write_png_gray(png, img.values)
    print(f"  wrote {png}")
