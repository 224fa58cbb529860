"""Image I/O: 8-bit PNG for dataset frames, .npy for lossless float renders."""

from __future__ import annotations

import numpy as np
from PIL import Image

__all__ = ["save_png", "load_png", "save_float", "load_float", "to_uint8", "to_float"]


def to_uint8(img: np.ndarray) -> np.ndarray:
    """[0,1] float RGB -> uint8 with round-half-away quantization."""
    return np.clip(np.rint(np.asarray(img) * 255.0), 0, 255).astype(np.uint8)


def to_float(img: np.ndarray) -> np.ndarray:
    return np.asarray(img, dtype=np.float32) / 255.0


def save_png(img: np.ndarray, path) -> None:
    arr = np.asarray(img)
    if arr.dtype != np.uint8:
        arr = to_uint8(arr)
    Image.fromarray(arr, mode="RGB").save(path, format="PNG")


def load_png(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def save_float(img: np.ndarray, path) -> None:
    np.save(path, np.asarray(img, dtype=np.float32))


def load_float(path) -> np.ndarray:
    return np.load(path)
