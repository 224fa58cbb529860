"""Rays, sampling, hash-grid encoding, and emission-absorption compositing."""

from .camera import (
    Camera,
    CameraFormatError,
    Rays,
    generate_rays,
    load_cameras,
    pixel_grid,
    ray_sphere_bounds,
    save_cameras,
)
from .compositing import binary_entropy, composite, entropy_reg
from .hashgrid import HashGrid, HashGridConfig
from .images import load_float, load_png, save_float, save_png, to_float, to_uint8
from .sampling import sample_depths, stratified_samples

__all__ = [
    "Camera",
    "CameraFormatError",
    "Rays",
    "generate_rays",
    "load_cameras",
    "pixel_grid",
    "ray_sphere_bounds",
    "save_cameras",
    "binary_entropy",
    "composite",
    "entropy_reg",
    "HashGrid",
    "HashGridConfig",
    "load_float",
    "load_png",
    "save_float",
    "save_png",
    "to_float",
    "to_uint8",
    "sample_depths",
    "stratified_samples",
]
