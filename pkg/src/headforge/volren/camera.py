"""Pinhole cameras, ray generation, projection, and the camera file format.

Conventions: OpenCV-style camera frame (x right, y down, z forward along the
optical axis); extrinsics are world-to-camera, x_cam = R @ x_world + t.
Pixel (i, j) covers [i, i+1) x [j, j+1); its center is (i + 0.5, j + 0.5).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import List, Sequence, Tuple

import numpy as np

__all__ = [
    "Camera",
    "Rays",
    "generate_rays",
    "pixel_grid",
    "ray_sphere_bounds",
    "save_cameras",
    "load_cameras",
    "CameraFormatError",
]

CAMERA_FILE_VERSION = 1


class CameraFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Camera:
    """Calibrated pinhole camera (intrinsics in pixels, world-to-camera pose)."""

    fx: float
    fy: float
    cx: float
    cy: float
    rotation: np.ndarray  # (3,3) world-to-camera
    translation: np.ndarray  # (3,)
    width: int
    height: int
    cam_id: str = "cam"

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)
        if not (self.fx > 0 and self.fy > 0) or not np.isfinite([self.fx, self.fy, self.cx, self.cy]).all():
            raise CameraFormatError(f"degenerate intrinsics: fx={self.fx}, fy={self.fy}")
        if np.linalg.norm(R.T @ R - np.eye(3)) > 1e-6:
            raise CameraFormatError("rotation is not orthonormal")
        if self.width <= 0 or self.height <= 0:
            raise CameraFormatError("image size must be positive")

    @property
    def center(self) -> np.ndarray:
        """Camera origin in world coordinates."""
        return -self.rotation.T @ self.translation

    @property
    def optical_axis(self) -> np.ndarray:
        return self.rotation.T @ np.array([0.0, 0.0, 1.0])

    def scaled(self, width: int, height: int) -> "Camera":
        """Same view at a different raster resolution."""
        sx, sy = width / self.width, height / self.height
        return replace(
            self, fx=self.fx * sx, fy=self.fy * sy, cx=self.cx * sx, cy=self.cy * sy,
            width=width, height=height,
        )

    def project(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """World points (N,3) -> pixel coordinates (N,2) and camera-frame depth (N,)."""
        p = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        pc = p @ self.rotation.T + self.translation
        z = pc[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = self.fx * pc[:, 0] / z + self.cx
            v = self.fy * pc[:, 1] / z + self.cy
        return np.stack([u, v], axis=-1), z

    def to_dict(self) -> dict:
        return {
            "id": self.cam_id,
            "fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
            "rotation": [float(x) for x in self.rotation.ravel()],  # row-major
            "translation": [float(x) for x in self.translation],
            "width": self.width, "height": self.height,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Camera":
        try:
            return cls(
                fx=float(d["fx"]), fy=float(d["fy"]), cx=float(d["cx"]), cy=float(d["cy"]),
                rotation=np.array(d["rotation"], dtype=np.float64).reshape(3, 3),
                translation=np.array(d["translation"], dtype=np.float64),
                width=int(d["width"]), height=int(d["height"]), cam_id=str(d["id"]),
            )
        except KeyError as exc:
            raise CameraFormatError(f"camera record missing field {exc}") from exc


@dataclass
class Rays:
    """A batch of world-space rays with unit directions and [near, far) bounds."""

    origins: np.ndarray  # (N,3)
    directions: np.ndarray  # (N,3), unit
    near: np.ndarray  # (N,)
    far: np.ndarray  # (N,)

    def __post_init__(self):
        norms = np.linalg.norm(self.directions, axis=-1)
        if not np.allclose(norms, 1.0, atol=1e-6):
            raise ValueError("ray directions must be unit length")
        if not (self.near >= 0).all() or not (self.near < self.far).all():
            raise ValueError("ray bounds must satisfy 0 <= near < far")

    def __len__(self) -> int:
        return self.origins.shape[0]


def pixel_grid(width: int, height: int) -> np.ndarray:
    """Pixel-center coordinates (H*W, 2) in row-major raster order."""
    xs = np.arange(width, dtype=np.float64) + 0.5
    ys = np.arange(height, dtype=np.float64) + 0.5
    gx, gy = np.meshgrid(xs, ys)
    return np.stack([gx.ravel(), gy.ravel()], axis=-1)


def generate_rays(
    camera: Camera,
    pixels: np.ndarray,
    near: float = 1e-3,
    far: float = 1e3,
) -> Rays:
    """World-space rays through the given pixel-center coordinates (N,2)."""
    px = np.asarray(pixels, dtype=np.float64).reshape(-1, 2)
    if (px[:, 0] < 0).any() or (px[:, 0] > camera.width).any() \
            or (px[:, 1] < 0).any() or (px[:, 1] > camera.height).any():
        raise ValueError("pixel coordinates outside image bounds")
    d_cam = np.stack(
        [(px[:, 0] - camera.cx) / camera.fx, (px[:, 1] - camera.cy) / camera.fy,
         np.ones(len(px))],
        axis=-1,
    )
    d_world = d_cam @ camera.rotation  # R^T applied row-wise
    d_world /= np.linalg.norm(d_world, axis=-1, keepdims=True)
    o = np.broadcast_to(camera.center, d_world.shape).copy()
    n = np.full(len(px), float(near))
    f = np.full(len(px), float(far))
    return Rays(o, d_world, n, f)


def ray_sphere_bounds(
    rays: Rays, center: np.ndarray, radius: float, min_near: float = 1e-3
) -> Tuple[Rays, np.ndarray]:
    """Tighten ray bounds to a bounding sphere; returns (rays, hit mask).

    Rays that miss the sphere keep a degenerate thin interval and are flagged
    False in the mask (callers shade them as pure background).
    """
    oc = rays.origins - np.asarray(center, dtype=np.float64)
    b = np.einsum("ij,ij->i", oc, rays.directions)
    c = np.einsum("ij,ij->i", oc, oc) - radius * radius
    disc = b * b - c
    hit = disc > 0
    sq = np.sqrt(np.maximum(disc, 0.0))
    t0 = np.maximum(-b - sq, min_near)
    t1 = -b + sq
    hit &= t1 > t0
    near = np.where(hit, t0, min_near)
    far = np.where(hit, t1, min_near * 2)
    return Rays(rays.origins, rays.directions, near, far), hit


def save_cameras(cameras: Sequence[Camera], path) -> None:
    payload = {"version": CAMERA_FILE_VERSION, "cameras": [c.to_dict() for c in cameras]}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)


def load_cameras(path) -> List[Camera]:
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CameraFormatError(f"{path}: malformed camera file at line {exc.lineno} col {exc.colno}") from exc
    if payload.get("version") != CAMERA_FILE_VERSION:
        raise CameraFormatError(
            f"{path}: camera file version {payload.get('version')!r}, expected {CAMERA_FILE_VERSION}"
        )
    return [Camera.from_dict(d) for d in payload["cameras"]]
