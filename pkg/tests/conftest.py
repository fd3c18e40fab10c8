"""Shared fixtures: synthetic datasets and the location of the real beat files.

The published per-beat CSVs (mitbih_train.csv / mitbih_test.csv) are not
redistributed here. Tests that need them look in $MITBIH_DATA_DIR, then in
./data/; when the files are absent those tests are skipped and the
synthetic-data analogues carry the load.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

from wvbeat.ingest import Dataset, load_beat_csv
from wvbeat.labels import ClassLabel
from wvbeat.synthetic import make_balanced_beats, make_beats

TRAIN_FILE_NAMES = ("mitbih_train.csv",)
TEST_FILE_NAMES = ("mitbih_test.csv",)


def _data_dir() -> Path | None:
    env = os.environ.get("MITBIH_DATA_DIR")
    candidates = [Path(env)] if env else []
    candidates.append(Path(__file__).resolve().parent.parent / "data")
    for cand in candidates:
        if cand.is_dir():
            return cand
    return None


def _find(names) -> Path | None:
    base = _data_dir()
    if base is None:
        return None
    for name in names:
        p = base / name
        if p.is_file():
            return p
    return None


def real_train_path() -> Path | None:
    return _find(TRAIN_FILE_NAMES)


def real_test_path() -> Path | None:
    return _find(TEST_FILE_NAMES)


def require_real_data(which: str = "both") -> tuple[Path | None, Path | None]:
    train, test = real_train_path(), real_test_path()
    if which in ("train", "both") and train is None:
        pytest.skip("real per-beat train file not present (set MITBIH_DATA_DIR)")
    if which in ("test", "both") and test is None:
        pytest.skip("real per-beat test file not present (set MITBIH_DATA_DIR)")
    return train, test


@pytest.fixture(scope="session")
def real_test_dataset() -> Dataset:
    _, test = require_real_data("test")
    return load_beat_csv(test, split_tag="test")


@pytest.fixture(scope="session")
def small_synth() -> Dataset:
    return make_balanced_beats(per_class=8, seed=11)


@pytest.fixture(scope="session")
def imbalanced_synth() -> Dataset:
    counts = {ClassLabel.F: 5, ClassLabel.N: 40, ClassLabel.Q: 12,
              ClassLabel.S: 9, ClassLabel.V: 20}
    return make_beats(counts, seed=5)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One line per acceptance criterion at the end of the run."""
    rows = []
    for outcome in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call":
                continue
            if "test_acceptance.py" in str(getattr(rep, "nodeid", "")):
                name = rep.nodeid.split("::")[-1]
                rows.append((name, outcome.upper()))
    if rows:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, outcome in sorted(rows):
            terminalreporter.write_line(f"{outcome:>7}  {name}")
