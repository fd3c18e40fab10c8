"""Compact residual classifier over 128x128 time-frequency images.

Architecture: a 7x7/stride-2 stem with max pooling, three residual stages,
global max pooling, an optional dense head, and a 5-way softmax. Widths and
depths are configurable; the defaults keep the network small enough to
train from scratch on a desktop CPU.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import ValidationError
from ..labels import CLASS_ORDER, ClassLabel
from .layers import (
    BatchNorm,
    Conv2d,
    Dense,
    Dropout,
    GlobalMaxPool,
    Layer,
    MaxPool2d,
    ReLU,
    ResidualBlock,
    softmax,
)

HEADS = ("none", "dense64", "dense1024_drop50_dense64")


@dataclass(frozen=True)
class ArchConfig:
    input_hw: tuple[int, int] = (128, 128)
    stem_filters: int = 64
    stem_kernel: int = 7
    stem_stride: int = 2
    pool_kernel: int = 3
    pool_stride: int = 2
    stage_widths: tuple[int, ...] = (16, 32, 64)
    blocks_per_stage: int = 2
    head: str = "none"
    num_classes: int = 5

    def __post_init__(self):
        if self.head not in HEADS:
            raise ValidationError(f"unknown head {self.head!r}; expected one of {HEADS}")
        object.__setattr__(self, "input_hw", tuple(self.input_hw))
        object.__setattr__(self, "stage_widths", tuple(self.stage_widths))

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ArchConfig":
        return cls(**json.loads(text))


def default_arch(head: str = "none") -> ArchConfig:
    return ArchConfig(head=head)


def baseline_arch(head: str = "none") -> ArchConfig:
    """Smallest configuration; exposed under the 'baseline' schedule name."""
    return ArchConfig(stem_filters=16, stage_widths=(8, 16, 32), blocks_per_stage=1, head=head)


class CnnModel:
    """The assembled network: ordered named layers plus a softmax output."""

    def __init__(self, arch: ArchConfig, seed: int = 0, dtype=np.float32):
        self.arch = arch
        self.seed = seed
        self.dtype = np.dtype(dtype)
        self.layers: list[tuple[str, Layer]] = []
        self._build()
        rng = np.random.default_rng(seed)
        for name, layer in self.layers:
            layer.init_params(rng, self.dtype)
            if isinstance(layer, Dropout):
                layer.rng = np.random.default_rng(np.random.SeedSequence((seed, len(self.layers))))

    def _build(self):
        a = self.arch
        add = self.layers.append
        add(("stem.conv", Conv2d(a.stem_kernel, 1, a.stem_filters, stride=a.stem_stride)))
        add(("stem.bn", BatchNorm(a.stem_filters)))
        add(("stem.relu", ReLU()))
        add(("stem.pool", MaxPool2d(a.pool_kernel, a.pool_stride, pad=1)))
        in_ch = a.stem_filters
        for s, width in enumerate(a.stage_widths):
            for b in range(a.blocks_per_stage):
                stride = 2 if (s > 0 and b == 0) else 1
                add((f"stage{s + 1}.block{b}", ResidualBlock(in_ch, width, stride)))
                in_ch = width
        add(("pool", GlobalMaxPool()))
        feat = in_ch
        if a.head == "dense64":
            add(("head.dense", Dense(feat, 64)))
            add(("head.relu", ReLU()))
            feat = 64
        elif a.head == "dense1024_drop50_dense64":
            add(("head.dense1", Dense(feat, 1024)))
            add(("head.relu1", ReLU()))
            add(("head.drop", Dropout(0.5)))
            add(("head.dense2", Dense(1024, 64)))
            add(("head.relu2", ReLU()))
            feat = 64
        add(("fc", Dense(feat, a.num_classes)))

    # -- flat views over the layer tree ------------------------------------

    def named_layers(self) -> list[tuple[str, Layer]]:
        """All leaf layers with hierarchical names, in forward order."""
        out: list[tuple[str, Layer]] = []
        for name, layer in self.layers:
            kids = layer.children()
            if kids:
                out.extend((f"{name}.{cn}", cl) for cn, cl in kids)
            else:
                out.append((name, layer))
        return out

    def named_params(self):
        """Yield (qualified name, layer, param key, array) for every parameter."""
        for lname, layer in self.named_layers():
            for key in sorted(layer.params):
                yield f"{lname}.{key}", layer, key, layer.params[key]

    def named_state(self):
        for lname, layer in self.named_layers():
            for key in sorted(layer.state):
                yield f"{lname}.{key}", layer, key, layer.state[key]

    def parameter_count(self) -> int:
        return sum(arr.size for _, _, _, arr in self.named_params())

    # -- execution ----------------------------------------------------------

    def _check_input(self, x: np.ndarray) -> np.ndarray:
        h, w = self.arch.input_hw
        if x.ndim == 3:
            x = x[:, :, :, None]
        if x.ndim != 4 or x.shape[1:] != (h, w, 1):
            raise ValidationError(f"expected input (B,{h},{w},1), got {x.shape}")
        return np.ascontiguousarray(x, dtype=self.dtype)

    def forward_logits(self, x: np.ndarray, training: bool = False, start: int = 0) -> np.ndarray:
        """Run layers[start:]; start > 0 takes precomputed features as input."""
        if start == 0:
            x = self._check_input(x)
        for _, layer in self.layers[start:]:
            x = layer.forward(x, training)
        return x

    def forward(self, x: np.ndarray, training: bool = False, start: int = 0) -> np.ndarray:
        """Class probabilities, one row per image; rows sum to 1."""
        return softmax(self.forward_logits(x, training, start))

    def first_trainable_index(self) -> int:
        """Top-level index of the first layer that is not frozen."""
        for i, (_, layer) in enumerate(self.layers):
            if not self._layer_frozen(layer):
                return i
        return len(self.layers)

    def extract_features(self, images: np.ndarray, upto: int, batch_size: int = 64) -> np.ndarray:
        """Activations after layers[:upto], batched, inference semantics.

        Frozen layers behave identically in train and inference mode (BN uses
        moving stats, nothing caches), so training on these features is
        arithmetically identical to training on the raw images.
        """
        chunks = []
        for s in range(0, len(images), batch_size):
            x = self._check_input(images[s:s + batch_size])
            for _, layer in self.layers[:upto]:
                x = layer.forward(x, False)
            chunks.append(x)
        return np.concatenate(chunks, axis=0)

    def backward(self, dlogits: np.ndarray) -> None:
        """Backpropagate from logits; stops below the deepest frozen prefix."""
        first_trainable = self.first_trainable_index()
        d = dlogits
        for i in range(len(self.layers) - 1, first_trainable - 1, -1):
            d = self.layers[i][1].backward(d)

    @staticmethod
    def _layer_frozen(layer: Layer) -> bool:
        kids = layer.children()
        if kids:
            return all(k.frozen for _, k in kids)
        return layer.frozen

    def predict(self, image: np.ndarray) -> tuple[ClassLabel, np.ndarray]:
        """Classify one image; ties break toward the lowest report-order index."""
        batch = image[None, ...] if image.ndim == 2 else image
        probs = self.forward(batch, training=False)[0]
        return CLASS_ORDER[int(np.argmax(probs))], probs

    # -- freezing -----------------------------------------------------------

    def freeze_prefix(self, prefix_names: tuple[str, ...] = ("stem", "stage1")) -> list[str]:
        """Freeze every layer whose name starts with one of the prefixes.

        Frozen layers are skipped by the optimizer; frozen BatchNorm runs in
        inference mode. Returns the frozen layer names (for logging).
        """
        frozen = []
        for name, layer in self.named_layers():
            if name.startswith(tuple(p + "." for p in prefix_names)) or name in prefix_names:
                layer.frozen = True
                frozen.append(name)
        return frozen

    def trainable_entries(self):
        """(name, layer, key) triplets the optimizer should update."""
        for qname, layer, key, _ in self.named_params():
            if not layer.frozen:
                yield qname, layer, key

    def l2_entries(self):
        """(layer, key) pairs subject to L2 (kernels of conv/dense layers)."""
        for _, layer in self.named_layers():
            for key in layer.l2_params:
                yield layer, key
