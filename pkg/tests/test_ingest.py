import numpy as np
import pytest

from wvbeat.errors import FileFormatError, ValidationError
from wvbeat.ingest import (
    Dataset,
    class_distribution,
    load_beat_csv,
    stratified_subset,
    write_beat_csv,
)
from wvbeat.labels import CLASS_ORDER, ClassLabel

from conftest import require_real_data


def _write_rows(path, rows):
    path.write_text("\n".join(",".join(str(v) for v in row) for row in rows) + "\n")


def test_single_row_of_zeros_is_one_n_beat(tmp_path):
    path = tmp_path / "one.csv"
    _write_rows(path, [[0.0] * 187 + [0]])
    ds = load_beat_csv(path)
    assert len(ds) == 1
    assert ds[0].label is ClassLabel.N
    assert ds.beat_length == 187


def test_file_label_convention(tmp_path):
    path = tmp_path / "labels.csv"
    rows = [[0.5] * 10 + [lab] for lab in (0, 1, 2, 3, 4)]
    _write_rows(path, rows)
    ds = load_beat_csv(path)
    assert [ds[i].label.code for i in range(5)] == ["N", "S", "V", "F", "Q"]


def test_float_labels_accepted(tmp_path):
    path = tmp_path / "floatlab.csv"
    _write_rows(path, [[0.25] * 4 + ["3.0"], [0.75] * 4 + ["4.000"]])
    ds = load_beat_csv(path)
    assert [r.label.code for r in ds.records] == ["F", "Q"]


def test_non_integral_label_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    _write_rows(path, [[0.5] * 4 + ["2.5"]])
    with pytest.raises(ValidationError, match="row 0"):
        load_beat_csv(path)


def test_unknown_label_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    _write_rows(path, [[0.5] * 4 + [1], [0.5] * 4 + [7]])
    with pytest.raises(ValidationError, match="row 1"):
        load_beat_csv(path)


def test_ragged_row_reports_position(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("0.1,0.2,0.3,0\n0.1,0.2,1\n")
    with pytest.raises(ValidationError, match="malformed"):
        load_beat_csv(path)


def test_sample_outside_range_rejected(tmp_path):
    path = tmp_path / "range.csv"
    _write_rows(path, [[0.5, 1.5, 0.5, 0.5, 0]])
    with pytest.raises(ValidationError, match="outside"):
        load_beat_csv(path)


def test_tiny_excursion_clamped(tmp_path):
    path = tmp_path / "clamp.csv"
    _write_rows(path, [[1.0000005, 0.5, -0.0000005, 0.5, 0]])
    ds = load_beat_csv(path)
    assert ds.samples.min() >= 0.0
    assert ds.samples.max() <= 1.0


def test_missing_file_is_io_error(tmp_path):
    with pytest.raises(FileFormatError):
        load_beat_csv(tmp_path / "absent.csv")


def test_locale_independent_parse(tmp_path):
    # decimal points only; scientific notation as found in the public files
    path = tmp_path / "sci.csv"
    path.write_text("9.60176subscript,nope\n")
    path.write_text("9.601770e-01,5.0e-01,0.0e+00,1.0,0\n")
    ds = load_beat_csv(path)
    assert np.isclose(ds.samples[0, 0], 0.960177)


def test_class_distribution_counts_sum(imbalanced_synth):
    dist = class_distribution(imbalanced_synth)
    assert sum(dist.values()) == len(imbalanced_synth)
    assert dist[ClassLabel.N] == 40
    assert dist[ClassLabel.F] == 5


def test_class_distribution_empty():
    ds = Dataset(samples=np.zeros((0, 8), dtype=np.float32), labels=np.zeros(0, dtype=np.int64))
    dist = class_distribution(ds)
    assert all(v == 0 for v in dist.values())


def test_round_trip_identity(tmp_path, imbalanced_synth):
    path = tmp_path / "rt.csv"
    write_beat_csv(imbalanced_synth, path)
    back = load_beat_csv(path)
    assert np.array_equal(back.samples, imbalanced_synth.samples)
    assert np.array_equal(back.labels, imbalanced_synth.labels)


def test_manifest_written(tmp_path, imbalanced_synth):
    import json

    path = tmp_path / "m.csv"
    manifest_path = write_beat_csv(imbalanced_synth, path)
    manifest = json.loads(manifest_path.read_text())
    assert manifest["n_records"] == len(imbalanced_synth)
    assert manifest["beat_length"] == imbalanced_synth.beat_length
    assert manifest["counts"]["N"] == 40


def test_stratified_subset_caps_classes(imbalanced_synth):
    sub = stratified_subset(imbalanced_synth, cap_per_class=10, seed=3)
    dist = class_distribution(sub)
    full = class_distribution(imbalanced_synth)
    for cls in CLASS_ORDER:
        assert dist[cls] == min(10, full[cls])


def test_stratified_subset_no_duplication(imbalanced_synth):
    sub = stratified_subset(imbalanced_synth, cap_per_class=10_000, seed=3)
    assert len(sub) == len(imbalanced_synth)
    assert np.array_equal(sub.samples, imbalanced_synth.samples)


def test_stratified_subset_deterministic(imbalanced_synth):
    a = stratified_subset(imbalanced_synth, cap_per_class=7, seed=42)
    b = stratified_subset(imbalanced_synth, cap_per_class=7, seed=42)
    assert np.array_equal(a.samples, b.samples)
    assert np.array_equal(a.labels, b.labels)


def test_stratified_subset_selection_without_replacement(imbalanced_synth):
    sub = stratified_subset(imbalanced_synth, cap_per_class=15, seed=0)
    # every selected row must exist in the source exactly once
    src = {row.tobytes() for row in imbalanced_synth.samples}
    rows = [row.tobytes() for row in sub.samples]
    assert len(rows) == len(set(rows))
    assert all(r in src for r in rows)


# -- real data (skipped when the files are not present) ----------------------

TABLE1_TEST = {"F": 162, "N": 18118, "Q": 1608, "S": 556, "V": 1448}
TABLE1_TRAIN = {"F": 641, "N": 72471, "Q": 6431, "S": 2223, "V": 5788}


def test_real_test_counts_match_published_distribution():
    _, test = require_real_data("test")
    ds = load_beat_csv(test, split_tag="test")
    dist = {c.code: n for c, n in class_distribution(ds).items()}
    assert dist == TABLE1_TEST
    assert len(ds) == 21892


def test_real_train_counts_match_published_distribution():
    train, _ = require_real_data("train")
    ds = load_beat_csv(train, split_tag="train")
    dist = {c.code: n for c, n in class_distribution(ds).items()}
    assert dist == TABLE1_TRAIN
    assert len(ds) == 87554
