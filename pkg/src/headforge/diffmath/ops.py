"""Reverse-mode gradient entry point, Adam, and the finite-difference harness.

`gradient` is the single differentiation contract every training loop uses;
`grad_check` is the independent oracle (central differences) the test suites
run against it. The two never share code paths.
"""

from __future__ import annotations

import math
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
import torch

from .params import AdamState, ParamVector

__all__ = [
    "NonFiniteError",
    "gradient",
    "value_and_gradient",
    "adam_step",
    "grad_check",
    "WORKING_DTYPE",
    "HIGH_DTYPE",
]

WORKING_DTYPE = torch.float32
HIGH_DTYPE = torch.float64


class NonFiniteError(FloatingPointError):
    """A loss or gradient evaluated to NaN/Inf; message names the source."""


def value_and_gradient(
    loss_fn: Callable[[ParamVector], torch.Tensor], params: ParamVector
) -> Tuple[float, ParamVector]:
    """Evaluate a scalar loss and its gradient w.r.t. every named tensor.

    Raises `NonFiniteError` naming the offending operation (re-running the
    pure loss under anomaly detection) or parameter group.
    """
    leaves = params.clone(requires_grad=True)
    loss = loss_fn(leaves)
    if loss.dim() != 0:
        raise ValueError(f"loss_fn must return a scalar, got shape {tuple(loss.shape)}")
    if not torch.isfinite(loss):
        _raise_named(loss_fn, params, "loss value")
    grads = torch.autograd.grad(
        loss, list(leaves.tensors().values()), allow_unused=True, create_graph=False
    )
    out: Dict[str, torch.Tensor] = {}
    for name, g in zip(leaves.names(), grads):
        if g is None:
            g = torch.zeros_like(leaves[name].detach())
        if not torch.isfinite(g).all():
            _raise_named(loss_fn, params, f"gradient of '{name}'")
        out[name] = g.detach()
    return float(loss.detach()), ParamVector(out)


def gradient(
    loss_fn: Callable[[ParamVector], torch.Tensor], params: ParamVector
) -> ParamVector:
    """∂loss/∂params; deterministic for fixed inputs."""
    return value_and_gradient(loss_fn, params)[1]


def _raise_named(loss_fn, params: ParamVector, where: str) -> None:
    # Re-run the (pure) loss under anomaly detection to name the producing op.
    try:
        with torch.autograd.detect_anomaly():
            leaves = params.clone(requires_grad=True)
            loss = loss_fn(leaves)
            torch.autograd.grad(loss, list(leaves.tensors().values()), allow_unused=True)
    except RuntimeError as exc:
        raise NonFiniteError(f"non-finite {where}: {exc}") from exc
    raise NonFiniteError(f"non-finite {where}")


def adam_step(
    params: ParamVector,
    grads: ParamVector,
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    frozen: Sequence[str] = (),
) -> Tuple[ParamVector, AdamState]:
    """One bias-corrected Adam update. Non-finite gradients reject the update.

    `frozen` lists name prefixes whose tensors are passed through untouched
    (moments not decayed either, so a later unfreeze resumes cleanly).
    """
    if params.shapes() != grads.shapes():
        raise ValueError("gradient shapes do not match parameter shapes")
    if not state.shape_matches(params):
        raise ValueError("Adam state shapes do not match parameter shapes")
    for name, g in grads.items():
        if not torch.isfinite(g).all():
            raise NonFiniteError(f"non-finite gradient for '{name}'; update rejected")

    t = state.step + 1
    c1 = 1.0 - beta1**t
    c2 = 1.0 - beta2**t
    new_p, new_m, new_v = {}, {}, {}
    for name, p in params.items():
        if any(name == f or name.startswith(f + ".") for f in frozen):
            new_p[name] = p
            new_m[name] = state.m[name]
            new_v[name] = state.v[name]
            continue
        g = grads[name].to(p.dtype)
        m = beta1 * state.m[name] + (1.0 - beta1) * g
        v = beta2 * state.v[name] + (1.0 - beta2) * g * g
        update = (m / c1) / (torch.sqrt(v / c2) + eps)
        new_p[name] = p.detach() - lr * update
        new_m[name] = m
        new_v[name] = v
    return ParamVector(new_p), AdamState(ParamVector(new_m), ParamVector(new_v), t)


def grad_check(
    f: Callable[[ParamVector], torch.Tensor],
    x: ParamVector,
    h: float = 1e-4,
    coords: Optional[Sequence[int]] = None,
    analytic: Optional[ParamVector] = None,
    rng: Optional[np.random.Generator] = None,
    max_coords: int = 64,
) -> float:
    """Worst relative error between analytic gradient and central differences.

    The denominator guard is max(|a|, |b|, 1e-8). Checks every coordinate by
    default; for large parameter vectors pass `coords` or let the harness
    sample `max_coords` of them (biased toward active coordinates so the
    comparison is informative).
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x64 = x.to_dtype(HIGH_DTYPE)
    if analytic is None:
        analytic = gradient(f, x64)
    a_flat = analytic.flat()
    flat = x64.flat()
    n = flat.size

    if coords is None:
        if n <= max_coords:
            coords = list(range(n))
        else:
            active = np.flatnonzero(np.abs(a_flat) > 0)
            gen = rng if rng is not None else np.random.Generator(np.random.PCG64(0))
            picks = []
            if active.size:
                k = min(max_coords - max_coords // 4, active.size)
                picks.append(active[gen.permutation(active.size)[:k]])
            picks.append(gen.integers(0, n, size=max_coords // 4))
            coords = np.unique(np.concatenate(picks))

    worst = 0.0
    for i in coords:
        e = np.zeros(n)
        e[i] = h
        f_plus = float(f(x64.assign_flat(flat + e)).detach())
        f_minus = float(f(x64.assign_flat(flat - e)).detach())
        fd = (f_plus - f_minus) / (2.0 * h)
        a = float(a_flat[i])
        err = abs(a - fd) / max(abs(a), abs(fd), 1e-8)
        worst = max(worst, err)
        if not math.isfinite(worst):
            return float("inf")
    return worst
