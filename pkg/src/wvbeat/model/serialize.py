"""Model file I/O: magic + version + architecture JSON + float32 blob.

The blob is little-endian regardless of host byte order, so files move
between machines. Parameter order inside the blob follows the model's
deterministic named-parameter order, recorded in the header for auditing.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import FileFormatError
from .net import ArchConfig, CnnModel

MAGIC = b"WVCN"
FORMAT_VERSION = 1


def save_model(model: CnnModel, path: str | Path) -> None:
    params = [(name, arr) for name, _, _, arr in model.named_params()]
    state = [(name, arr) for name, _, _, arr in model.named_state()]
    header = {
        "arch": json.loads(model.arch.to_json()),
        "seed": model.seed,
        "dtype": "float32",
        "params": [[name, list(arr.shape)] for name, arr in params],
        "state": [[name, list(arr.shape)] for name, arr in state],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("ascii")
    blob = b"".join(arr.astype("<f4").tobytes(order="C") for _, arr in params + state)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(blob)


def load_model(path: str | Path) -> CnnModel:
    path = Path(path)
    if not path.is_file():
        raise FileFormatError(f"model file not found: {path}")
    raw = path.read_bytes()
    if len(raw) < 12 or raw[:4] != MAGIC:
        raise FileFormatError(f"{path} is not a model file (bad magic)")
    version, header_len = struct.unpack("<II", raw[4:12])
    if version != FORMAT_VERSION:
        raise FileFormatError(f"{path}: unsupported model format version {version}")
    if len(raw) < 12 + header_len:
        raise FileFormatError(f"{path}: truncated header")
    header = json.loads(raw[12:12 + header_len].decode("ascii"))
    blob = raw[12 + header_len:]

    arch = ArchConfig(**{k: tuple(v) if isinstance(v, list) else v
                         for k, v in header["arch"].items()})
    model = CnnModel(arch, seed=header.get("seed", 0))

    expected = sum(int(np.prod(shape)) for _, shape in header["params"] + header["state"]) * 4
    if len(blob) != expected:
        raise FileFormatError(f"{path}: blob holds {len(blob)} bytes, expected {expected}")

    offset = 0

    def take(shape):
        nonlocal offset
        n = int(np.prod(shape)) * 4
        arr = np.frombuffer(blob[offset:offset + n], dtype="<f4").reshape(shape)
        offset += n
        return np.ascontiguousarray(arr, dtype=np.float32)

    param_map = {name: (layer, key) for name, layer, key, _ in model.named_params()}
    for name, shape in header["params"]:
        if name not in param_map:
            raise FileFormatError(f"{path}: unknown parameter {name!r} for this architecture")
        layer, key = param_map[name]
        layer.params[key] = take(shape)
    state_map = {name: (layer, key) for name, layer, key, _ in model.named_state()}
    for name, shape in header["state"]:
        if name not in state_map:
            raise FileFormatError(f"{path}: unknown state entry {name!r} for this architecture")
        layer, key = state_map[name]
        layer.state[key] = take(shape)
    return model
