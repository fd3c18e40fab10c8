"""CNN building blocks with explicit forward/backward passes.

Data layout is NHWC throughout. Convolutions run as im2col + GEMM; the
column matrix from the forward pass is cached for the weight gradient.
Every layer stores its parameter gradients in `grads` after backward().

All layers accept a dtype at construction (float32 for training, float64
for finite-difference gradient checking).
"""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError


class Layer:
    """Base class: parameterless identity-ish behavior, overridden as needed."""

    #: parameter names regularized by L2 (conv / dense kernels only)
    l2_params: tuple[str, ...] = ()

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.state: dict[str, np.ndarray] = {}
        self.frozen = False

    def init_params(self, rng: np.random.Generator, dtype) -> None:
        pass

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dout: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def children(self) -> list[tuple[str, "Layer"]]:
        return []


def _conv_geometry(size: int, kernel: int, stride: int, pad: int) -> int:
    out = (size + 2 * pad - kernel) // stride + 1
    if out < 1:
        raise ValidationError("convolution output would be empty")
    return out


class Conv2d(Layer):
    """2-D convolution, symmetric zero padding (default kernel//2)."""

    l2_params = ("W",)

    def __init__(self, kernel: int, in_ch: int, out_ch: int, stride: int = 1, pad: int | None = None):
        super().__init__()
        self.kernel = kernel
        self.in_ch = in_ch
        self.out_ch = out_ch
        self.stride = stride
        self.pad = kernel // 2 if pad is None else pad
        self._cols: np.ndarray | None = None
        self._x_shape: tuple | None = None

    def init_params(self, rng, dtype):
        fan_in = self.kernel * self.kernel * self.in_ch
        std = np.sqrt(2.0 / fan_in)
        self.params = {
            "W": (rng.normal(0.0, std, (self.kernel, self.kernel, self.in_ch, self.out_ch))).astype(dtype),
            "b": np.zeros(self.out_ch, dtype=dtype),
        }

    def _patches(self, xp: np.ndarray, oh: int, ow: int) -> np.ndarray:
        b = xp.shape[0]
        k, s = self.kernel, self.stride
        sb, sh, sw, sc = xp.strides
        shape = (b, oh, ow, k, k, self.in_ch)
        strides = (sb, sh * s, sw * s, sh, sw, sc)
        return np.lib.stride_tricks.as_strided(xp, shape=shape, strides=strides, writeable=False)

    def forward(self, x, training):
        if x.ndim != 4 or x.shape[3] != self.in_ch:
            raise ValidationError(
                f"conv expected (B,H,W,{self.in_ch}), got {x.shape}"
            )
        b, h, w, _ = x.shape
        oh = _conv_geometry(h, self.kernel, self.stride, self.pad)
        ow = _conv_geometry(w, self.kernel, self.stride, self.pad)
        p = self.pad
        xp = np.pad(x, ((0, 0), (p, p), (p, p), (0, 0))) if p else x
        cols = self._patches(xp, oh, ow).reshape(b * oh * ow, -1)
        wmat = self.params["W"].reshape(-1, self.out_ch)
        out = cols @ wmat + self.params["b"]
        if training and not self.frozen:
            self._cols = cols
            self._x_shape = x.shape
        return out.reshape(b, oh, ow, self.out_ch)

    def backward(self, dout):
        b, oh, ow, _ = dout.shape
        dmat = dout.reshape(b * oh * ow, self.out_ch)
        self.grads["W"] = (self._cols.T @ dmat).reshape(self.params["W"].shape)
        self.grads["b"] = dmat.sum(axis=0)

        wmat = self.params["W"].reshape(-1, self.out_ch)
        dcols = (dmat @ wmat.T).reshape(b, oh, ow, self.kernel, self.kernel, self.in_ch)
        _, h, w, _ = self._x_shape
        p, s, k = self.pad, self.stride, self.kernel
        dpad = np.zeros((b, h + 2 * p, w + 2 * p, self.in_ch), dtype=dout.dtype)
        for i in range(k):
            for j in range(k):
                dpad[:, i:i + s * oh:s, j:j + s * ow:s, :] += dcols[:, :, :, i, j, :]
        self._cols = None
        return dpad[:, p:p + h, p:p + w, :] if p else dpad


class BatchNorm(Layer):
    """Batch normalization over all axes but the channel axis.

    Moving statistics use momentum 0.9 and the biased variance, so freezing
    them to one batch's statistics makes train and inference mode agree. A
    frozen BatchNorm runs in inference mode and stops updating its stats.
    """

    def __init__(self, channels: int, momentum: float = 0.9, eps: float = 1e-5):
        super().__init__()
        self.channels = channels
        self.momentum = momentum
        self.eps = eps
        self._cache = None

    def init_params(self, rng, dtype):
        self.params = {
            "gamma": np.ones(self.channels, dtype=dtype),
            "beta": np.zeros(self.channels, dtype=dtype),
        }
        self.state = {
            "moving_mean": np.zeros(self.channels, dtype=dtype),
            "moving_var": np.ones(self.channels, dtype=dtype),
        }

    def forward(self, x, training):
        axes = tuple(range(x.ndim - 1))
        if training and not self.frozen:
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            m = self.momentum
            self.state["moving_mean"] = (m * self.state["moving_mean"] + (1 - m) * mean).astype(x.dtype)
            self.state["moving_var"] = (m * self.state["moving_var"] + (1 - m) * var).astype(x.dtype)
        else:
            mean = self.state["moving_mean"]
            var = self.state["moving_var"]
        ivar = 1.0 / np.sqrt(var + self.eps)
        if training and not self.frozen:
            self._cache = (x, mean, ivar, axes)
        # fused affine: gamma * (x - mean) * ivar + beta, two passes over x
        scale = self.params["gamma"] * ivar
        shift = self.params["beta"] - mean * scale
        out = x * scale
        out += shift
        return out

    def backward(self, dout):
        x, mean, ivar, axes = self._cache
        self._cache = None
        count = x.size // x.shape[-1]
        xhat = (x - mean) * ivar
        self.grads["gamma"] = (dout * xhat).sum(axis=axes)
        self.grads["beta"] = dout.sum(axis=axes)
        dxhat = dout * self.params["gamma"]
        return (ivar / count) * (
            count * dxhat
            - dxhat.sum(axis=axes)
            - xhat * (dxhat * xhat).sum(axis=axes)
        )


class ReLU(Layer):
    def __init__(self):
        super().__init__()
        self._mask = None

    def forward(self, x, training):
        if training and not self.frozen:
            self._mask = x > 0
        return np.maximum(x, 0)

    def backward(self, dout):
        out = dout * self._mask
        self._mask = None
        return out


class MaxPool2d(Layer):
    """Max pooling with -inf padding; ties route gradient to the first max."""

    def __init__(self, kernel: int = 3, stride: int = 2, pad: int = 1):
        super().__init__()
        self.kernel = kernel
        self.stride = stride
        self.pad = pad
        self._cache = None

    def forward(self, x, training):
        b, h, w, c = x.shape
        k, s, p = self.kernel, self.stride, self.pad
        oh = _conv_geometry(h, k, s, p)
        ow = _conv_geometry(w, k, s, p)
        xp = np.pad(x, ((0, 0), (p, p), (p, p), (0, 0)), constant_values=-np.inf) if p else x
        track = training and not self.frozen
        out = None
        arg = None
        # accumulate the max over the k*k window offsets; first max wins ties
        for idx in range(k * k):
            i, j = divmod(idx, k)
            view = xp[:, i:i + s * oh:s, j:j + s * ow:s, :]
            if out is None:
                out = view.copy()
                if track:
                    arg = np.zeros(out.shape, dtype=np.int8)
            elif track:
                better = view > out
                np.copyto(out, view, where=better)
                arg[better] = idx
            else:
                np.maximum(out, view, out=out)
        if track:
            self._cache = (arg, x.shape, (oh, ow))
        return out

    def backward(self, dout):
        arg, x_shape, (oh, ow) = self._cache
        self._cache = None
        b, h, w, c = x_shape
        k, s, p = self.kernel, self.stride, self.pad
        dpad = np.zeros((b, h + 2 * p, w + 2 * p, c), dtype=dout.dtype)
        for idx in range(k * k):
            i, j = divmod(idx, k)
            sel = arg == idx
            view = dpad[:, i:i + s * oh:s, j:j + s * ow:s, :]
            view += np.where(sel, dout, 0)
        return dpad[:, p:p + h, p:p + w, :] if p else dpad


class GlobalMaxPool(Layer):
    """(B, H, W, C) -> (B, C) by max over the spatial axes."""

    def __init__(self):
        super().__init__()
        self._cache = None

    def forward(self, x, training):
        b, h, w, c = x.shape
        flat = x.reshape(b, h * w, c)
        arg = flat.argmax(axis=1)
        out = np.take_along_axis(flat, arg[:, None, :], axis=1)[:, 0, :]
        if training and not self.frozen:
            self._cache = (arg, x.shape)
        return out

    def backward(self, dout):
        arg, x_shape = self._cache
        self._cache = None
        b, h, w, c = x_shape
        dflat = np.zeros((b, h * w, c), dtype=dout.dtype)
        np.put_along_axis(dflat, arg[:, None, :], dout[:, None, :], axis=1)
        return dflat.reshape(x_shape)


class Dense(Layer):
    l2_params = ("W",)

    def __init__(self, in_features: int, out_features: int):
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features
        self._x = None

    def init_params(self, rng, dtype):
        std = np.sqrt(2.0 / self.in_features)
        self.params = {
            "W": rng.normal(0.0, std, (self.in_features, self.out_features)).astype(dtype),
            "b": np.zeros(self.out_features, dtype=dtype),
        }

    def forward(self, x, training):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ValidationError(f"dense expected (B,{self.in_features}), got {x.shape}")
        if training and not self.frozen:
            self._x = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, dout):
        self.grads["W"] = self._x.T @ dout
        self.grads["b"] = dout.sum(axis=0)
        dx = dout @ self.params["W"].T
        self._x = None
        return dx


class Dropout(Layer):
    """Inverted dropout; identity at inference. Mask draws from its own rng."""

    def __init__(self, rate: float):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValidationError("dropout rate must lie in [0, 1)")
        self.rate = rate
        self.rng = np.random.default_rng(0)
        self._mask = None
        self.freeze_mask = False  # reuse the previous mask (gradient checking)

    def forward(self, x, training):
        if not training or self.rate == 0.0:
            return x
        if not (self.freeze_mask and self._mask is not None):
            self._mask = self.rng.random(x.shape) >= self.rate
        return x * self._mask / (1.0 - self.rate)

    def backward(self, dout):
        return dout * self._mask / (1.0 - self.rate)


class ResidualBlock(Layer):
    """conv-BN-ReLU-conv-BN plus a (projected) identity shortcut, then ReLU.

    With all-zero conv weights the main path contributes beta = 0 and the
    block is the identity on non-negative inputs.
    """

    def __init__(self, in_ch: int, out_ch: int, stride: int = 1):
        super().__init__()
        self.conv1 = Conv2d(3, in_ch, out_ch, stride=stride)
        self.bn1 = BatchNorm(out_ch)
        self.relu1 = ReLU()
        self.conv2 = Conv2d(3, out_ch, out_ch)
        self.bn2 = BatchNorm(out_ch)
        self.relu_out = ReLU()
        self.projects = in_ch != out_ch or stride != 1
        if self.projects:
            self.proj_conv = Conv2d(1, in_ch, out_ch, stride=stride, pad=0)
            self.proj_bn = BatchNorm(out_ch)

    def children(self):
        named = [
            ("conv1", self.conv1),
            ("bn1", self.bn1),
            ("relu1", self.relu1),
            ("conv2", self.conv2),
            ("bn2", self.bn2),
            ("relu_out", self.relu_out),
        ]
        if self.projects:
            named += [("proj_conv", self.proj_conv), ("proj_bn", self.proj_bn)]
        return named

    def init_params(self, rng, dtype):
        for _, child in self.children():
            child.init_params(rng, dtype)

    def forward(self, x, training):
        main = self.conv1.forward(x, training)
        main = self.bn1.forward(main, training)
        main = self.relu1.forward(main, training)
        main = self.conv2.forward(main, training)
        main = self.bn2.forward(main, training)
        if self.projects:
            short = self.proj_conv.forward(x, training)
            short = self.proj_bn.forward(short, training)
        else:
            short = x
        return self.relu_out.forward(main + short, training)

    def backward(self, dout):
        dsum = self.relu_out.backward(dout)
        dmain = self.bn2.backward(dsum)
        dmain = self.conv2.backward(dmain)
        dmain = self.relu1.backward(dmain)
        dmain = self.bn1.backward(dmain)
        dmain = self.conv1.backward(dmain)
        if self.projects:
            dshort = self.proj_bn.backward(dsum)
            dshort = self.proj_conv.backward(dshort)
        else:
            dshort = dsum
        return dmain + dshort


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax, accumulated in float64."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)
