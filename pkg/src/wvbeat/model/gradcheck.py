"""Central finite-difference gradient checking for layers and small nets."""

from __future__ import annotations

import numpy as np


def numerical_gradient(f, x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """Central differences of a scalar function, elementwise over x."""
    grad = np.zeros_like(x, dtype=np.float64)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + eps
        fp = f()
        flat[i] = keep - eps
        fm = f()
        flat[i] = keep
        gflat[i] = (fp - fm) / (2 * eps)
    return grad


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """max |a - n| / max(1, |a|, |n|), elementwise."""
    denom = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
    return float(np.max(np.abs(analytic - numeric) / denom))


def check_layer(layer, x: np.ndarray, rng: np.random.Generator, eps: float = 1e-5) -> dict[str, float]:
    """Compare analytic and numeric gradients of sum(out * R) for a layer.

    R is a fixed random projection so every output element matters. The
    layer must already hold float64 parameters. Returns the max relative
    error for the input ('x') and for each parameter.
    """
    x = x.astype(np.float64)
    out = layer.forward(x, True)
    proj = rng.normal(size=out.shape)

    def objective() -> float:
        return float((layer.forward(x, True) * proj).sum())

    layer.forward(x, True)
    dx = layer.backward(proj.copy())
    analytic = {"x": dx, **{k: layer.grads[k].copy() for k in layer.params}}

    errors = {}
    errors["x"] = max_relative_error(analytic["x"], numerical_gradient(objective, x, eps))
    for key in layer.params:
        errors[key] = max_relative_error(
            analytic[key], numerical_gradient(objective, layer.params[key], eps)
        )
    return errors
