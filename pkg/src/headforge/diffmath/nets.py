"""Small feed-forward networks over explicit `ParamVector` storage.

Hidden activations are smooth (SiLU) so every finite-difference check is
well-posed. Layers are plain matmuls; parameters live under dotted names
``<prefix>.l<i>.w`` / ``.b`` so whole networks freeze or serialize as groups.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
import torch
import torch.nn.functional as F

from .params import ParamVector
from .rng import Rng

__all__ = ["MLP", "linear_init", "positional_encoding"]


def linear_init(
    rng: Rng,
    in_dim: int,
    out_dim: int,
    dtype: torch.dtype,
    mode: str = "he",
) -> Tuple[torch.Tensor, torch.Tensor]:
    """Weight (out,in) and bias (out,) for one linear layer.

    Modes: ``he`` scaled normal, ``zeros`` (and zero bias), ``identity``
    (requires square shape).
    """
    if mode == "zeros":
        w = np.zeros((out_dim, in_dim))
    elif mode == "identity":
        if in_dim != out_dim:
            raise ValueError(f"identity init needs square layer, got {in_dim}->{out_dim}")
        w = np.eye(out_dim)
    elif mode == "he":
        w = rng.normal((out_dim, in_dim), std=float(np.sqrt(2.0 / in_dim)), dtype=np.float64)
    else:
        raise ValueError(f"unknown init mode '{mode}'")
    weight = torch.from_numpy(np.ascontiguousarray(w)).to(dtype)
    bias = torch.zeros(out_dim, dtype=dtype)
    return weight, bias


@dataclass(frozen=True)
class MLP:
    """Fully-connected net: widths (in, h1, ..., out), SiLU between layers."""

    widths: Sequence[int]
    prefix: str = "mlp"
    final_init: str = "he"  # "zeros" => network starts as the zero map

    @property
    def in_dim(self) -> int:
        return self.widths[0]

    @property
    def out_dim(self) -> int:
        return self.widths[-1]

    @property
    def n_layers(self) -> int:
        return len(self.widths) - 1

    def init_params(self, rng: Rng, dtype: torch.dtype = torch.float32) -> ParamVector:
        tensors = {}
        for i in range(self.n_layers):
            mode = self.final_init if i == self.n_layers - 1 else "he"
            w, b = linear_init(rng.split(("layer", i)), self.widths[i], self.widths[i + 1], dtype, mode)
            tensors[f"{self.prefix}.l{i}.w"] = w
            tensors[f"{self.prefix}.l{i}.b"] = b
        return ParamVector(tensors)

    def forward(self, params: ParamVector, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-1] != self.in_dim:
            raise ValueError(
                f"input width {x.shape[-1]} does not match declared width {self.in_dim}"
            )
        h = x
        for i in range(self.n_layers):
            h = F.linear(h, params[f"{self.prefix}.l{i}.w"], params[f"{self.prefix}.l{i}.b"])
            if i < self.n_layers - 1:
                h = F.silu(h)
        return h

    __call__ = forward


def positional_encoding(x: torch.Tensor, n_freqs: int, include_input: bool = True) -> torch.Tensor:
    """Sinusoidal features [sin(2^k pi x), cos(2^k pi x)] along the last axis."""
    if n_freqs == 0:
        return x if include_input else x[..., :0]
    freqs = 2.0 ** torch.arange(n_freqs, dtype=x.dtype, device=x.device) * torch.pi
    ang = x[..., None] * freqs  # (..., D, n_freqs)
    enc = torch.cat([torch.sin(ang), torch.cos(ang)], dim=-1).flatten(-2)
    if include_input:
        enc = torch.cat([x, enc], dim=-1)
    return enc
