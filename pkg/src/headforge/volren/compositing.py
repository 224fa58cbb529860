"""Discrete emission-absorption compositing and the opacity-entropy regularizer."""

from __future__ import annotations

from typing import Tuple

import torch

__all__ = ["composite", "entropy_reg", "binary_entropy"]

_LN2 = 0.6931471805599453


def composite(
    sigma: torch.Tensor,
    color: torch.Tensor,
    delta: torch.Tensor,
    background: torch.Tensor,
    validate: bool = True,
) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Alpha-composite per-ray samples over a constant background.

    sigma (R,S) >= 0, color (R,S,3) in [0,1], delta (R,S) > 0.
    Returns (color (R,3), accumulated opacity (R,), weights (R,S)) with
    alpha_i = 1 - exp(-sigma_i delta_i), T_i = prod_{j<i}(1 - alpha_j),
    weight_i = T_i alpha_i; remaining transmittance goes to the background.
    """
    if validate:
        if (sigma < 0).any():
            raise ValueError("negative density in ray samples")
        if (delta <= 0).any():
            raise ValueError("non-positive segment length in ray samples")
    alpha = -torch.expm1(-sigma * delta)
    one_minus = 1.0 - alpha
    trans = torch.cumprod(
        torch.cat([torch.ones_like(alpha[..., :1]), one_minus], dim=-1), dim=-1
    )
    weights = trans[..., :-1] * alpha
    omega = weights.sum(dim=-1)
    bg = background.to(color.dtype)
    out = (weights[..., None] * color).sum(dim=-2) + trans[..., -1:] * bg
    return out, omega, weights


def binary_entropy(omega: torch.Tensor) -> torch.Tensor:
    """H(w) = -w log2 w - (1-w) log2 (1-w), with 0 log 0 := 0. Exact at {0, 1}."""
    return (torch.special.entr(omega) + torch.special.entr(1.0 - omega)) / _LN2


def entropy_reg(omega: torch.Tensor) -> torch.Tensor:
    """Validated opacity entropy; minimized at fully transparent/opaque rays."""
    if (omega < -1e-6).any() or (omega > 1.0 + 1e-6).any():
        raise ValueError("accumulated opacity outside [0, 1]")
    return binary_entropy(torch.clamp(omega, 0.0, 1.0))
