import dataclasses
import json

import numpy as np
import pytest

from wvbeat.errors import DivergenceError, ValidationError
from wvbeat.model import (
    ArchConfig,
    CnnModel,
    EarlyStopConfig,
    Sgd,
    TrainSchedule,
    fit,
    load_schedule,
    loss,
    lr_at_epoch,
    schedule_preset,
    train_step,
)
from wvbeat.model.training import _to_onehot, cross_entropy


MICRO_ARCH = ArchConfig(input_hw=(16, 16), stem_filters=4, stem_kernel=3,
                        stage_widths=(4,), blocks_per_stage=1)


def micro_model(seed=0):
    return CnnModel(MICRO_ARCH, seed=seed)


def micro_data(rng, n=12):
    x = rng.random((n, 16, 16)).astype(np.float32)
    y = rng.integers(0, 5, n)
    return x, y


def micro_schedule(**kw):
    base = dict(name="test", optimizer="sgd_minibatch", lr=0.05, batch_size=6,
                epochs=3, l2=0.0)
    base.update(kw)
    return TrainSchedule(**base)


# -- loss ---------------------------------------------------------------------

def test_loss_perfect_prediction_zero():
    probs = np.eye(5)[[0, 3, 2]]
    assert loss(probs, np.array([0, 3, 2])) == pytest.approx(0.0, abs=1e-9)


def test_loss_uniform_is_ln5():
    probs = np.full((4, 5), 0.2)
    labels = np.array([0, 1, 2, 3])
    assert loss(probs, labels) == pytest.approx(np.log(5), abs=1e-12)
    assert loss(probs, labels) == pytest.approx(1.6094, abs=1e-4)


def test_loss_l2_with_zero_weights_is_pure_ce():
    model = micro_model()
    for layer, key in model.l2_entries():
        layer.params[key][:] = 0.0
    probs = np.full((2, 5), 0.2)
    labels = np.array([1, 4])
    assert loss(probs, labels, model, l2=0.1) == pytest.approx(np.log(5), abs=1e-12)


def test_loss_includes_l2_term():
    model = micro_model()
    probs = np.full((2, 5), 0.2)
    labels = np.array([1, 4])
    sq = sum(float((layer.params[k] ** 2).sum()) for layer, k in model.l2_entries())
    expected = np.log(5) + 1e-4 * sq
    assert loss(probs, labels, model, l2=1e-4) == pytest.approx(expected, rel=1e-9)


# -- train_step ---------------------------------------------------------------

def test_zero_lr_leaves_parameters_unchanged(rng):
    model = micro_model()
    before = {n: p.copy() for n, _, _, p in model.named_params()}
    x, y = micro_data(rng)
    train_step(model, Sgd(0.0), x, y, l2=0.0)
    for n, _, _, p in model.named_params():
        assert np.array_equal(before[n], p), n


def test_repeated_batch_loss_decreases(rng):
    model = micro_model(seed=1)
    x, y = micro_data(rng, n=8)
    opt = Sgd(0.01)
    first, _ = train_step(model, opt, x, y, l2=0.0)
    last = first
    for _ in range(199):
        last, _ = train_step(model, opt, x, y, l2=0.0)
    assert last < first


def test_divergence_raises(rng):
    model = micro_model()
    model.layers[-1][1].params["W"][:] = np.inf
    x, y = micro_data(rng, n=4)
    with np.errstate(invalid="ignore"), pytest.raises(DivergenceError):
        train_step(model, Sgd(0.01), x, y, l2=0.0)


def test_frozen_layers_not_updated(rng):
    model = micro_model()
    model.freeze_prefix(("stem",))
    stem_w = model.layers[0][1].params["W"].copy()
    x, y = micro_data(rng)
    train_step(model, Sgd(0.5), x, y, l2=1e-4)
    assert np.array_equal(stem_w, model.layers[0][1].params["W"])


# -- schedules ----------------------------------------------------------------

def test_presets_mirror_the_grid():
    p3 = schedule_preset(3)
    assert p3.early_stop == EarlyStopConfig(0.0005, 5, "acc")
    assert p3.epochs == 23 and p3.freeze == "none" and p3.lr == 0.01

    p5 = schedule_preset(5)
    assert p5.val_fraction == 0.2
    assert p5.early_stop.monitor == "val_acc"
    assert p5.freeze == "stem_stage1"

    p7 = schedule_preset(7)
    assert p7.head == "dense64"
    assert p7.lr_policy == "step_decay" and p7.lr_decay_period == 20

    p9 = schedule_preset(9)
    assert p9.use_augmented

    p10 = schedule_preset(10)
    assert p10.lr_policy == "step_decay"
    assert p10.lr_decay_rate == 0.5 and p10.lr_decay_period == 5
    assert p10.epochs == 30
    assert p10.freeze == "stem_stage1"
    assert p10.early_stop is None
    assert p10.adam_beta1 == 0.9 and p10.adam_beta2 == 0.99 and p10.adam_eps == 1e-7

    assert schedule_preset(1).model == "baseline"
    assert schedule_preset(2).optimizer == "sgd_minibatch"
    with pytest.raises(ValidationError):
        schedule_preset(11)


def test_schedule_json_round_trip(tmp_path):
    sched = schedule_preset(6)
    path = tmp_path / "sched.json"
    path.write_text(sched.to_json())
    again = load_schedule(path)
    assert again == sched
    assert load_schedule("6") == dataclasses.replace(sched)


def test_val_monitor_requires_val_fraction():
    with pytest.raises(ValidationError):
        TrainSchedule(early_stop=EarlyStopConfig(monitor="val_acc"), val_fraction=0.0)


def test_lr_policy_values():
    assert lr_at_epoch(0.01, 0, "fixed", 0.5, 5) == 0.01
    assert lr_at_epoch(0.01, 4, "step_decay", 0.5, 5) == 0.01
    assert lr_at_epoch(0.01, 5, "step_decay", 0.5, 5) == 0.005
    assert lr_at_epoch(0.01, 10, "step_decay", 0.5, 5) == 0.0025


# -- fit ----------------------------------------------------------------------

def test_fit_history_length_and_keys(rng):
    x, y = micro_data(rng, n=18)
    model, history = fit(micro_model(), x, y, micro_schedule(epochs=4), seed=3)
    assert len(history) == 4
    row = history.epochs[0]
    assert {"epoch", "train_loss", "train_acc", "lr", "wall_time"} <= set(row)
    assert not history.stopped_early


def test_fit_val_split_reports_val_metrics(rng):
    x, y = micro_data(rng, n=20)
    sched = micro_schedule(epochs=2, val_fraction=0.2)
    _, history = fit(micro_model(), x, y, sched, seed=3)
    assert "val_acc" in history.epochs[0]
    assert "val_loss" in history.epochs[0]


def test_early_stop_honors_patience(rng):
    x, y = micro_data(rng, n=18)
    # min_delta so large that no epoch ever counts as an improvement
    sched = micro_schedule(epochs=50,
                           early_stop=EarlyStopConfig(min_delta=1.0, patience=3, monitor="acc"))
    _, history = fit(micro_model(), x, y, sched, seed=3)
    assert history.stopped_early
    assert history.stop_epoch <= 1 + 3 + 1
    assert len(history) == history.stop_epoch


def test_step_decay_lr_recorded(rng):
    x, y = micro_data(rng, n=12)
    sched = micro_schedule(epochs=6, lr=0.01, lr_policy="step_decay",
                           lr_decay_rate=0.5, lr_decay_period=2)
    _, history = fit(micro_model(), x, y, sched, seed=0)
    lrs = [row["lr"] for row in history.epochs]
    assert lrs == [0.01, 0.01, 0.005, 0.005, 0.0025, 0.0025]


def test_fit_deterministic_bitwise(rng):
    x, y = micro_data(rng, n=24)
    sched = micro_schedule(epochs=3, optimizer="adam", lr=0.002)
    m1, h1 = fit(micro_model(seed=7), x, y, sched, seed=11)
    m2, h2 = fit(micro_model(seed=7), x, y, sched, seed=11)
    for (n1, _, _, p1), (_, _, _, p2) in zip(m1.named_params(), m2.named_params()):
        assert np.array_equal(p1, p2), n1
    strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_time"} for r in rows]
    assert strip(h1.epochs) == strip(h2.epochs)


def test_fit_feature_cache_is_exact(rng):
    """fit() trains through cached frozen features; results must equal a
    manual loop that forwards every batch through the whole network."""
    x, y = micro_data(rng, n=24)
    sched = micro_schedule(epochs=2, freeze="stem_stage1")

    cached_model = CnnModel(MICRO_ARCH, seed=5)
    cached_model.freeze_prefix(("stem", "stage1"))
    cached_model, _ = fit(cached_model, x, y, sched, seed=9)

    manual = CnnModel(MICRO_ARCH, seed=5)
    manual.freeze_prefix(("stem", "stage1"))
    opt = sched.make_optimizer()
    loop_rng = np.random.default_rng(np.random.SeedSequence((9, 0xF17)))
    for _ in range(sched.epochs):
        order = loop_rng.permutation(len(y))
        for s in range(0, len(order), sched.batch_size):
            sel = order[s:s + sched.batch_size]
            train_step(manual, opt, x[sel], y[sel], sched.l2, start=0)

    for (n1, _, _, p1), (_, _, _, p2) in zip(cached_model.named_params(), manual.named_params()):
        assert np.array_equal(p1, p2), n1


def test_fit_empty_data_rejected():
    with pytest.raises(ValidationError):
        fit(micro_model(), np.zeros((0, 16, 16), dtype=np.float32), np.zeros(0), micro_schedule())
