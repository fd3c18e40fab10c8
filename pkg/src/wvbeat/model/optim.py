"""Optimizers and learning-rate policies."""

from __future__ import annotations

import numpy as np


class Sgd:
    """Plain mini-batch gradient descent."""

    def __init__(self, lr: float):
        self.lr = lr

    def step(self, entries) -> None:
        for _, layer, key in entries:
            layer.params[key] -= self.lr * layer.grads[key]


class Adam:
    """Adam with bias correction. Defaults follow the training presets
    (beta2 = 0.99 as configured there, not the framework-default 0.999)."""

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.99, eps: float = 1e-7):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, entries) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for name, layer, key in entries:
            g = layer.grads[key]
            m = self._m.get(name)
            if m is None:
                m = self._m[name] = np.zeros_like(layer.params[key])
                self._v[name] = np.zeros_like(layer.params[key])
            v = self._v[name]
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            layer.params[key] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def lr_at_epoch(base_lr: float, epoch: int, policy: str, decay_rate: float, period: int) -> float:
    """Learning rate for a 0-based epoch index under the schedule policy."""
    if policy == "fixed":
        return base_lr
    if policy == "step_decay":
        return base_lr * decay_rate ** (epoch // period)
    raise ValueError(f"unknown lr policy {policy!r}")
