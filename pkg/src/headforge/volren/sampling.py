"""Stratified sampling of depths along rays."""

from __future__ import annotations

from typing import Optional

import numpy as np
import torch

from ..diffmath.rng import Rng

__all__ = ["stratified_samples", "sample_depths"]


def stratified_samples(
    near: np.ndarray,
    far: np.ndarray,
    n_samples: int,
    rng: Optional[Rng] = None,
) -> np.ndarray:
    """Depths (N_rays, n_samples): one uniform draw per stratum of [near, far).

    With rng=None, deterministic midpoints t_i = near + (i - 0.5) * span / n.
    Strictly increasing along each ray.
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples per ray")
    near = np.asarray(near, dtype=np.float64).reshape(-1, 1)
    far = np.asarray(far, dtype=np.float64).reshape(-1, 1)
    idx = np.arange(n_samples, dtype=np.float64)
    if rng is None:
        jitter = np.full((near.shape[0], n_samples), 0.5)
    else:
        jitter = rng.uniform((near.shape[0], n_samples), dtype=np.float64)
        # keep draws strictly inside each stratum so ordering is strict
        jitter = np.clip(jitter, 1e-7, 1.0 - 1e-7)
    frac = (idx[None, :] + jitter) / n_samples
    return near + frac * (far - near)


def sample_depths(
    near: np.ndarray,
    far: np.ndarray,
    n_samples: int,
    rng: Optional[Rng],
    dtype: torch.dtype,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Torch depths plus per-sample segment lengths (the stratum widths).

    Using the stratum width as delta makes homogeneous-medium compositing
    exact: sum(delta) == far - near per ray.
    """
    t = stratified_samples(near, far, n_samples, rng)
    span = (np.asarray(far, dtype=np.float64) - np.asarray(near, dtype=np.float64)) / n_samples
    delta = np.broadcast_to(span.reshape(-1, 1), t.shape).copy()
    return (
        torch.from_numpy(t).to(dtype),
        torch.from_numpy(delta).to(dtype),
    )
