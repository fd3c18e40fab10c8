"""Image-tensor export/import: the boundary to external training harnesses.

Blob layout: raw little-endian float32, row-major, shape [count, rows, cols].
A JSON sidecar `<blob>.json` records count, rows, cols, ramp_strength, the
per-image class codes, and the class order used for ordinals.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import FileFormatError, ValidationError
from .labels import CLASS_CODES, ClassLabel

TENSOR_VERSION = 1


def sidecar_path(blob_path: str | Path) -> Path:
    return Path(str(blob_path) + ".json")


def save_tensor(
    blob_path: str | Path,
    images: np.ndarray,
    labels,
    *,
    ramp_strength: float,
    extra_meta: dict | None = None,
) -> Path:
    """Write images + sidecar; returns the sidecar path."""
    images = np.ascontiguousarray(images, dtype=np.float32)
    if images.ndim != 3:
        raise ValidationError("tensor images must have shape (count, rows, cols)")
    labels = [ClassLabel(int(v)).code for v in labels]
    if len(labels) != images.shape[0]:
        raise ValidationError("label count does not match image count")
    blob_path = Path(blob_path)
    blob_path.write_bytes(images.astype("<f4").tobytes(order="C"))
    meta = {
        "version": TENSOR_VERSION,
        "count": int(images.shape[0]),
        "rows": int(images.shape[1]),
        "cols": int(images.shape[2]),
        "ramp_strength": float(ramp_strength),
        "class_order": list(CLASS_CODES),
        "labels": labels,
    }
    if extra_meta:
        meta.update(extra_meta)
    side = sidecar_path(blob_path)
    side.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="ascii")
    return side


def load_tensor(blob_path: str | Path) -> tuple[np.ndarray, np.ndarray, dict]:
    """Read blob + sidecar back into (images, label ordinals, meta).

    Fails with byte counts when the blob size disagrees with the sidecar.
    """
    blob_path = Path(blob_path)
    side = sidecar_path(blob_path)
    if not blob_path.is_file():
        raise FileFormatError(f"tensor blob not found: {blob_path}")
    if not side.is_file():
        raise FileFormatError(f"tensor sidecar not found: {side}")
    meta = json.loads(side.read_text(encoding="ascii"))
    if meta.get("version") != TENSOR_VERSION:
        raise FileFormatError(f"unsupported tensor version {meta.get('version')!r}")
    count, rows, cols = int(meta["count"]), int(meta["rows"]), int(meta["cols"])
    raw = blob_path.read_bytes()
    expected = count * rows * cols * 4
    if len(raw) != expected:
        raise FileFormatError(
            f"tensor blob {blob_path} holds {len(raw)} bytes, expected {expected}"
        )
    images = np.frombuffer(raw, dtype="<f4").reshape(count, rows, cols).copy()
    labels = np.array([int(ClassLabel.from_code(c)) for c in meta["labels"]], dtype=np.int64)
    if labels.shape[0] != count:
        raise FileFormatError("sidecar label count does not match image count")
    return images, labels, meta


def write_png_gray(path: str | Path, image: np.ndarray) -> None:
    """Write one image as an 8-bit grayscale PNG (min-max scaled), stdlib only."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValidationError("PNG export expects a single 2-D image")
    lo, hi = float(img.min()), float(img.max())
    scaled = np.zeros_like(img) if hi == lo else (img - lo) / (hi - lo)
    pixels = (scaled * 255.0 + 0.5).astype(np.uint8)

    height, width = pixels.shape
    raw = b"".join(b"\x00" + pixels[r].tobytes() for r in range(height))

    def chunk(tag: bytes, payload: bytes) -> bytes:
        return (
            struct.pack(">I", len(payload))
            + tag
            + payload
            + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
        )

    header = struct.pack(">IIBBBBB", width, height, 8, 0, 0, 0, 0)  # 8-bit grayscale
    png = (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", header)
        + chunk(b"IDAT", zlib.compress(raw, 9))
        + chunk(b"IEND", b"")
    )
    Path(path).write_bytes(png)
