"""Finite-difference gradient checks for every layer type, double precision."""

import numpy as np
import pytest

from wvbeat.model.gradcheck import check_layer, max_relative_error, numerical_gradient
from wvbeat.model.layers import (
    BatchNorm,
    Conv2d,
    Dense,
    Dropout,
    GlobalMaxPool,
    MaxPool2d,
    ReLU,
    ResidualBlock,
    softmax,
)

TOL = 1e-4


def _made(layer, seed=1):
    layer.init_params(np.random.default_rng(seed), np.float64)
    return layer


@pytest.mark.parametrize("kernel,stride,pad", [(3, 1, None), (3, 2, None), (7, 2, None), (1, 1, 0)])
def test_conv_gradients(kernel, stride, pad, rng):
    layer = _made(Conv2d(kernel, 2, 3, stride=stride, pad=pad))
    errs = check_layer(layer, rng.normal(size=(2, 8, 8, 2)), rng)
    assert max(errs.values()) < TOL


def test_batchnorm_gradients(rng):
    layer = _made(BatchNorm(3))
    errs = check_layer(layer, rng.normal(size=(4, 5, 5, 3)), rng)
    assert max(errs.values()) < TOL


def test_batchnorm_dense_input_gradients(rng):
    layer = _made(BatchNorm(6))
    errs = check_layer(layer, rng.normal(size=(8, 6)), rng)
    assert max(errs.values()) < TOL


def test_relu_gradients(rng):
    layer = ReLU()
    x = rng.normal(size=(3, 6, 6, 2))
    x[np.abs(x) < 1e-3] = 0.5  # keep away from the kink
    errs = check_layer(layer, x, rng)
    assert max(errs.values()) < TOL


def test_maxpool_gradients(rng):
    layer = MaxPool2d(3, 2, 1)
    errs = check_layer(layer, rng.normal(size=(2, 8, 8, 2)), rng)
    assert max(errs.values()) < TOL


def test_global_maxpool_gradients(rng):
    layer = GlobalMaxPool()
    errs = check_layer(layer, rng.normal(size=(3, 5, 5, 4)), rng)
    assert max(errs.values()) < TOL


def test_dense_gradients(rng):
    layer = _made(Dense(7, 4))
    errs = check_layer(layer, rng.normal(size=(5, 7)), rng)
    assert max(errs.values()) < TOL


def test_dropout_gradients(rng):
    layer = Dropout(0.4)
    layer.freeze_mask = True  # draw the mask once so the map is differentiable
    errs = check_layer(layer, rng.normal(size=(6, 10)), rng)
    assert max(errs.values()) < TOL


@pytest.mark.parametrize("in_ch,out_ch,stride", [(3, 3, 1), (2, 4, 2)])
def test_residual_block_input_gradients(in_ch, out_ch, stride, rng):
    layer = _made(ResidualBlock(in_ch, out_ch, stride))
    errs = check_layer(layer, rng.normal(size=(2, 8, 8, in_ch)), rng)
    assert max(errs.values()) < TOL


def test_residual_block_param_gradients(rng):
    """Parameters inside the block (both paths) against finite differences."""
    block = _made(ResidualBlock(2, 3, 2))
    x = rng.normal(size=(2, 6, 6, 2))
    proj = rng.normal(size=block.forward(x, True).shape)

    def objective():
        return float((block.forward(x, True) * proj).sum())

    block.forward(x, True)
    block.backward(proj.copy())
    for name, child in block.children():
        for key, grad in child.grads.items():
            numeric = numerical_gradient(objective, child.params[key])
            assert max_relative_error(grad, numeric) < TOL, f"{name}.{key}"


def test_softmax_cross_entropy_gradient(rng):
    """d(CE o softmax)/dlogits equals probs - onehot."""
    logits = rng.normal(size=(4, 5))
    onehot = np.zeros((4, 5))
    onehot[np.arange(4), rng.integers(0, 5, 4)] = 1.0

    def ce(z):
        p = softmax(z)
        return float(-(onehot * np.log(p)).sum() / 4)

    analytic = (softmax(logits) - onehot) / 4
    numeric = numerical_gradient(lambda: ce(logits), logits)
    assert max_relative_error(analytic, numeric) < TOL


def test_batchnorm_train_infer_consistency(rng):
    """Moving stats pinned to one batch's stats make both modes agree."""
    bn = BatchNorm(4, momentum=0.0)  # moving <- batch in one step
    bn.init_params(np.random.default_rng(0), np.float64)
    x = rng.normal(size=(6, 5, 5, 4))
    train_out = bn.forward(x, True)
    infer_out = bn.forward(x, False)
    assert np.max(np.abs(train_out - infer_out)) < 1e-6


def test_residual_identity_with_zero_weights(rng):
    block = _made(ResidualBlock(3, 3, 1))
    for key in ("conv1", "conv2"):
        layer = getattr(block, key)
        layer.params["W"][:] = 0.0
        layer.params["b"][:] = 0.0
    x = np.abs(rng.normal(size=(2, 6, 6, 3)))  # non-negative: final ReLU is inert
    out = block.forward(x, True)
    assert np.max(np.abs(out - x)) < 1e-6


def test_maxpool_tie_goes_to_first(rng):
    pool = MaxPool2d(2, 2, 0)
    x = np.ones((1, 4, 4, 1))
    out = pool.forward(x, True)
    dout = np.ones_like(out)
    dx = pool.backward(dout)
    # gradient routed to exactly one element per window, the first
    assert dx.sum() == out.size
    assert np.array_equal(dx[0, ::2, ::2, 0], np.ones((2, 2)))
