"""Multiresolution hash-grid positional encoding.

Each level is a virtual dense grid whose vertices are addressed by a spatial
hash: XOR of coordinate-wise multiplications by fixed large odd primes,
modulo the (power-of-two) table size. Features at a query point are the
trilinear interpolation of the 8 enclosing vertex features; the output is
differentiable w.r.t. both the feature table and the query position.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
import torch

from ..diffmath.rng import Rng

__all__ = ["HashGridConfig", "HashGrid"]

_PRIMES = (73856093, 19349663, 83492791)
_CORNERS = torch.tensor(
    [[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)], dtype=torch.int64
)


@dataclass(frozen=True)
class HashGridConfig:
    levels: int = 8
    table_size: int = 2**14
    features: int = 2
    base_resolution: int = 16
    max_resolution: int = 256
    init_scale: float = 1e-2

    def __post_init__(self):
        if self.table_size & (self.table_size - 1):
            raise ValueError("table_size must be a power of two")
        res = self.resolutions()
        if not (np.diff(res) > 0).all():
            raise ValueError(f"level resolutions must be strictly increasing, got {res.tolist()}")

    def resolutions(self) -> np.ndarray:
        """Per-level grid resolution, geometric between base and max."""
        if self.levels == 1:
            return np.array([self.base_resolution], dtype=np.int64)
        g = np.exp(
            np.linspace(np.log(self.base_resolution), np.log(self.max_resolution), self.levels)
        )
        return np.floor(g + 1e-9).astype(np.int64)

    @property
    def out_dim(self) -> int:
        return self.levels * self.features


@dataclass
class HashGrid:
    """Feature grid over an axis-aligned bounding box; table lives in ParamVector."""

    config: HashGridConfig
    box_lo: np.ndarray
    box_hi: np.ndarray
    clamp_count: int = field(default=0, compare=False)

    def __post_init__(self):
        self.box_lo = np.asarray(self.box_lo, dtype=np.float64).reshape(3)
        self.box_hi = np.asarray(self.box_hi, dtype=np.float64).reshape(3)
        if not (self.box_hi > self.box_lo).all():
            raise ValueError("degenerate bounding box")
        self._res = self.config.resolutions()

    def init_table(self, rng: Rng, dtype: torch.dtype = torch.float32) -> torch.Tensor:
        """(levels, table_size, features), small uniform init."""
        cfg = self.config
        vals = rng.uniform(
            (cfg.levels, cfg.table_size, cfg.features),
            low=-cfg.init_scale, high=cfg.init_scale, dtype=np.float64,
        )
        return torch.from_numpy(vals).to(dtype)

    def _hash(self, coords: torch.Tensor) -> torch.Tensor:
        h = coords[..., 0] * _PRIMES[0]
        h = h ^ (coords[..., 1] * _PRIMES[1])
        h = h ^ (coords[..., 2] * _PRIMES[2])
        return h & (self.config.table_size - 1)

    def encode(self, table: torch.Tensor, p: torch.Tensor) -> torch.Tensor:
        """Features (..., levels*features) at world points p (..., 3).

        Points outside the box are clamped onto it; clamps are counted on the
        grid instance.
        """
        shape = p.shape[:-1]
        flat = p.reshape(-1, 3)
        lo = torch.as_tensor(self.box_lo, dtype=p.dtype)
        hi = torch.as_tensor(self.box_hi, dtype=p.dtype)
        clamped = torch.clamp(flat, lo, hi)
        n_out = int((clamped != flat).any(dim=-1).sum())
        if n_out:
            self.clamp_count += n_out
        x01 = (clamped - lo) / (hi - lo)

        outs = []
        for lvl in range(self.config.levels):
            res = int(self._res[lvl])
            scaled = x01 * res
            cell = torch.clamp(scaled.detach().floor().long(), 0, res - 1)
            frac = scaled - cell.to(p.dtype)  # in [0, 1], differentiable in p
            corners = cell[:, None, :] + _CORNERS[None, :, :]  # (N,8,3)
            idx = self._hash(corners)  # (N,8)
            feats = table[lvl][idx]  # (N,8,F)
            w = torch.where(_CORNERS[None, :, :].to(p.dtype) > 0, frac[:, None, :], 1.0 - frac[:, None, :])
            weight = w.prod(dim=-1)  # (N,8)
            outs.append((weight[..., None] * feats).sum(dim=1))
        return torch.cat(outs, dim=-1).reshape(*shape, self.config.out_dim)

    def vertex_position(self, level: int, coord: Tuple[int, int, int]) -> np.ndarray:
        """World position of an integer grid vertex (test support)."""
        res = int(self._res[level])
        u = np.asarray(coord, dtype=np.float64) / res
        return self.box_lo + u * (self.box_hi - self.box_lo)
