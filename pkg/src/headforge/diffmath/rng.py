"""Splittable, explicitly-seeded random source.

All randomness in the pipeline flows through `Rng` objects passed into
operations; there is no ambient global RNG. `split` derives an independent
child stream from the parent's seed and a label, so the same (seed, label)
always yields the same stream regardless of draw order elsewhere.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["Rng"]


def _derive(seed: int, key: object) -> int:
    digest = hashlib.blake2b(f"{seed}/{key!r}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class Rng:
    """Deterministic random generator (PCG64) with jax-style splitting."""

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def split(self, key: object) -> "Rng":
        """Child stream derived from (seed, key); independent of draw state."""
        return Rng(_derive(self.seed, key))

    def normal(self, shape=(), std: float = 1.0, dtype=np.float32) -> np.ndarray:
        out = self._gen.standard_normal(shape, dtype=np.float64) * std
        return out.astype(dtype, copy=False)

    def uniform(self, shape=(), low: float = 0.0, high: float = 1.0, dtype=np.float32) -> np.ndarray:
        out = self._gen.uniform(low, high, size=shape)
        return np.asarray(out, dtype=dtype)

    def integers(self, low: int, high: int, size=None) -> np.ndarray:
        """Uniform integers in [low, high)."""
        return self._gen.integers(low, high, size=size)

    def choice(self, n: int, size=None, replace: bool = True) -> np.ndarray:
        return self._gen.choice(n, size=size, replace=replace)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def token(self, length: int, alphabet: str = "abcdefghijklmnopqrstuvwxyz") -> str:
        idx = self._gen.integers(0, len(alphabet), size=length)
        return "".join(alphabet[i] for i in idx)

    def __repr__(self) -> str:  # pragma: no cover
        return f"Rng(seed={self.seed})"
