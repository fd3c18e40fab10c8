#!/usr/bin/env python3
"""End-to-end desk run on synthetic beats: balance, transform, train, report.

Uses a deliberately small subset and epoch budget so the script finishes in
about a minute; see the acceptance suite for the full desk-scale run.
"""

import dataclasses
import time

from wvbeat.augment import AugmentPlan, balance_classes
from wvbeat.ingest import class_distribution
from wvbeat.labels import ClassLabel
from wvbeat.metrics import evaluate
from wvbeat.model import fit, schedule_preset
from wvbeat.synthetic import make_balanced_beats, make_beats
from wvbeat.tfr import transform_beats

# an imbalanced pool, like the real training distribution in miniature
train = make_beats({ClassLabel.F: 20, ClassLabel.N: 200, ClassLabel.Q: 60,
                    ClassLabel.S: 40, ClassLabel.V: 80}, seed=1, split_tag="train")
test = make_balanced_beats(per_class=40, seed=2, split_tag="test")
print("train distribution:", {c.code: n for c, n in class_distribution(train).items()})

# bring every class to 100 records: minority classes gain noisy copies
balanced = balance_classes(train, AugmentPlan(target_count=100, seed=3))
print("after balancing:   ", {c.code: n for c, n in class_distribution(balanced).items()})

t0 = time.time()
x_train = transform_beats(balanced.samples)
x_test = transform_beats(test.samples)
print(f"transformed {len(balanced) + len(test)} beats "
      f"in {time.time() - t0:.1f} s")

# the final-row schedule, shortened for a quick demo
schedule = dataclasses.replace(schedule_preset(10), epochs=6)
model = schedule.build_model(seed=0)
t0 = time.time()
model, history = fit(model, x_train, balanced.labels, schedule, seed=0, verbose=True)
print(f"trained {len(history)} epochs in {time.time() - t0:.0f} s")

report = evaluate(model, x_test, test.labels)
print()
print(report.format_table())
