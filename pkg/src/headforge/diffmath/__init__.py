"""Differentiable numerics substrate shared by every other module."""

from .nets import MLP, linear_init, positional_encoding
from .ops import (
    HIGH_DTYPE,
    WORKING_DTYPE,
    NonFiniteError,
    adam_step,
    grad_check,
    gradient,
    value_and_gradient,
)
from .params import AdamState, ParamFormatError, ParamVector
from .rng import Rng

__all__ = [
    "MLP",
    "linear_init",
    "positional_encoding",
    "HIGH_DTYPE",
    "WORKING_DTYPE",
    "NonFiniteError",
    "adam_step",
    "grad_check",
    "gradient",
    "value_and_gradient",
    "AdamState",
    "ParamFormatError",
    "ParamVector",
    "Rng",
]
