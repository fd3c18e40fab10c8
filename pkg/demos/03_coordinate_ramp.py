#!/usr/bin/env python3
"""Why the images get a linear tilt along the time axis.

Convolutions are translation invariant: two beats whose morphology differs
only by WHERE an event happens in the window produce feature maps that a
global pooling stage can no longer tell apart. Adding strength * c/(T-1)
to column c re-injects the position into the pixel values themselves.
"""

import numpy as np

from wvbeat.tfr import WvdImage, add_coordinate_ramp, normalize_unit_range, ramp_matrix

rng = np.random.default_rng(0)

# Two images with the same blob at different time positions
early = np.zeros((128, 128))
late = np.zeros((128, 128))
early[40:60, 20:36] = 1.0
late[40:60, 92:108] = 1.0

print("without the ramp, a position-agnostic statistic cannot separate them:")
print(f"  global max:  early {early.max():.3f}   late {late.max():.3f}")
print(f"  global mean: early {early.mean():.4f}  late {late.mean():.4f}")

re = add_coordinate_ramp(WvdImage(early), 0.25).values
rl = add_coordinate_ramp(WvdImage(late), 0.25).values
print("with the ramp, the same statistics become position-aware:")
print(f"  global max:  early {re.max():.4f}   late {rl.max():.4f}")
print(f"  blob-region mean: early {re[40:60, 20:36].mean():.4f}   "
      f"late {rl[40:60, 92:108].mean():.4f}")

# The ramp itself is a fixed, removable overlay
img = normalize_unit_range(rng.normal(size=(128, 128)))
ramped = add_coordinate_ramp(WvdImage(img), 0.25).values
residual = ramped - ramp_matrix(128, 128, 0.25)
print(f"\nramp removability: max |(img + ramp) - ramp - img| = "
      f"{np.abs(residual - img).max():.2e}")
print(f"the ramp's last column is exactly 0.25: "
      f"{bool((ramp_matrix(128, 128, 0.25)[:, -1] == 0.25).all())}")
