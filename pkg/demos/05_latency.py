#!/usr/bin/env python3
"""Per-beat classification latency on one CPU core.

Real-time use cares about the time to classify a single incoming beat:
transform (WVD + ramp) plus one forward pass, no batching.
"""

import time

import numpy as np

from wvbeat.model import CnnModel, default_arch
from wvbeat.synthetic import make_balanced_beats
from wvbeat.tfr import beat_to_image

model = CnnModel(default_arch(), seed=0)
beats = make_balanced_beats(per_class=40, seed=5).samples

transform_ms, infer_ms = [], []
for beat in beats:
    t0 = time.perf_counter()
    image = beat_to_image(beat.astype(np.float64))
    t1 = time.perf_counter()
    model.predict(image)
    t2 = time.perf_counter()
    transform_ms.append((t1 - t0) * 1e3)
    infer_ms.append((t2 - t1) * 1e3)

total = np.array(transform_ms) + np.array(infer_ms)
print(f"beats measured:    {len(beats)}")
print(f"transform mean:    {np.mean(transform_ms):6.2f} ms")
print(f"inference mean:    {np.mean(infer_ms):6.2f} ms")
print(f"total mean:        {total.mean():6.2f} ms   p95: {np.percentile(total, 95):6.2f} ms")
print(f"\na typical beat lasts ~1 s, so {total.mean():.0f} ms per beat "
      "leaves ample real-time headroom")
