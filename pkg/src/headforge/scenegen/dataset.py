"""Multi-view video dataset: construction, validation, and disk format.

Layout: ``manifest.json`` + ``cameras.json`` (camera file format) + one
directory of numbered PNG frames per camera. Round trips are lossless.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ..volren.camera import Camera, load_cameras, save_cameras
from ..volren.images import load_png, save_png, to_float
from .scene import SceneConfig, SyntheticScene, generate_scene

__all__ = [
    "MultiViewVideoDataset",
    "DatasetFormatError",
    "make_camera_ring",
    "build_dataset",
    "write_dataset",
    "read_dataset",
]

MANIFEST_VERSION = 1


class DatasetFormatError(ValueError):
    pass


def make_camera_ring(
    n_cameras: int,
    resolution: int,
    radius: float = 2.6,
    elevation_deg: float = 8.0,
    fov_deg: float = 42.0,
    look_at=(0.0, 0.0, 0.0),
) -> List[Camera]:
    """Ring of inward-looking cameras; index 0 sits on +z (the frontal view)."""
    center = np.asarray(look_at, dtype=np.float64)
    f = 0.5 * resolution / np.tan(np.deg2rad(fov_deg) / 2.0)
    cams = []
    elev = np.deg2rad(elevation_deg)
    for i in range(n_cameras):
        az = 2.0 * np.pi * i / n_cameras
        pos = center + radius * np.array(
            [np.sin(az) * np.cos(elev), np.sin(elev), np.cos(az) * np.cos(elev)]
        )
        z_axis = center - pos
        z_axis /= np.linalg.norm(z_axis)
        up = np.array([0.0, 1.0, 0.0])
        x_axis = np.cross(z_axis, up)
        x_axis /= np.linalg.norm(x_axis)
        # camera y points down in the raster; build a right-handed frame
        y_axis = np.cross(z_axis, x_axis)
        R = np.stack([x_axis, y_axis, z_axis], axis=0)
        t = -R @ pos
        cams.append(
            Camera(
                fx=f, fy=f, cx=resolution / 2.0, cy=resolution / 2.0,
                rotation=R, translation=t, width=resolution, height=resolution,
                cam_id=f"cam{i:02d}",
            )
        )
    return cams


@dataclass
class MultiViewVideoDataset:
    """Calibrated multi-view video with optional ground-truth scene attached."""

    cameras: List[Camera]
    images: np.ndarray  # (C, M, H, W, 3) uint8
    fps: float
    frontal_id: str
    scene_seed: Optional[int] = None
    scene_config: Optional[SceneConfig] = None

    def __post_init__(self):
        if len(self.cameras) < 2:
            raise DatasetFormatError("need at least 2 cameras")
        if self.images.ndim != 5 or self.images.shape[0] != len(self.cameras):
            raise DatasetFormatError("image array must be (cameras, frames, H, W, 3)")
        if self.images.shape[1] < 2:
            raise DatasetFormatError("need at least 2 frames")
        if self.images.dtype != np.uint8:
            raise DatasetFormatError("images must be uint8")
        ids = [c.cam_id for c in self.cameras]
        if len(set(ids)) != len(ids):
            raise DatasetFormatError("duplicate camera ids")
        if self.frontal_id not in ids:
            raise DatasetFormatError(f"frontal camera '{self.frontal_id}' not in dataset")
        for c in self.cameras:
            if (c.height, c.width) != self.images.shape[2:4]:
                raise DatasetFormatError(f"camera {c.cam_id} size differs from image array")

    @property
    def n_cameras(self) -> int:
        return len(self.cameras)

    @property
    def n_frames(self) -> int:
        return int(self.images.shape[1])

    @property
    def frontal_index(self) -> int:
        return [c.cam_id for c in self.cameras].index(self.frontal_id)

    def camera_index(self, cam_id: str) -> int:
        return [c.cam_id for c in self.cameras].index(cam_id)

    def frame_float(self, cam: int, frame: int) -> np.ndarray:
        return to_float(self.images[cam, frame])

    def scene(self) -> SyntheticScene:
        if self.scene_seed is None or self.scene_config is None:
            raise DatasetFormatError("dataset carries no ground-truth scene parameters")
        return generate_scene(self.scene_seed, self.scene_config)


def build_dataset(
    scene: SyntheticScene,
    n_cameras: int,
    resolution: int,
    camera_radius: float = 2.6,
) -> MultiViewVideoDataset:
    """Render every (camera, frame) pair of the scene into a dataset."""
    cams = make_camera_ring(n_cameras, resolution, radius=camera_radius)
    m = scene.config.frames
    images = np.zeros((len(cams), m, resolution, resolution, 3), dtype=np.uint8)
    for ci, cam in enumerate(cams):
        for j in range(m):
            img = scene.render(cam, j)
            images[ci, j] = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    return MultiViewVideoDataset(
        cameras=cams,
        images=images,
        fps=scene.config.fps,
        frontal_id="cam00",
        scene_seed=scene.seed,
        scene_config=scene.config,
    )


def write_dataset(ds: MultiViewVideoDataset, path) -> None:
    os.makedirs(path, exist_ok=True)
    save_cameras(ds.cameras, os.path.join(path, "cameras.json"))
    manifest = {
        "version": MANIFEST_VERSION,
        "kind": "multiview-video",
        "fps": ds.fps,
        "frames": ds.n_frames,
        "size": [int(ds.images.shape[3]), int(ds.images.shape[2])],
        "frontal": ds.frontal_id,
        "camera_ids": [c.cam_id for c in ds.cameras],
        "scene": None
        if ds.scene_config is None
        else {"seed": ds.scene_seed, "config": dataclasses.asdict(ds.scene_config)},
    }
    with open(os.path.join(path, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1)
    for ci, cam in enumerate(ds.cameras):
        cam_dir = os.path.join(path, cam.cam_id)
        os.makedirs(cam_dir, exist_ok=True)
        for j in range(ds.n_frames):
            save_png(ds.images[ci, j], os.path.join(cam_dir, f"f{j:04d}.png"))


def read_dataset(path) -> MultiViewVideoDataset:
    man_path = os.path.join(path, "manifest.json")
    try:
        with open(man_path) as fh:
            manifest = json.load(fh)
    except FileNotFoundError as exc:
        raise DatasetFormatError(f"missing manifest: {man_path}") from exc
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(
            f"{man_path}: corrupted manifest at line {exc.lineno} col {exc.colno}"
        ) from exc
    if manifest.get("version") != MANIFEST_VERSION:
        raise DatasetFormatError(
            f"manifest version {manifest.get('version')!r}, expected {MANIFEST_VERSION}"
        )
    cameras = load_cameras(os.path.join(path, "cameras.json"))
    order = {cid: i for i, cid in enumerate(manifest["camera_ids"])}
    cameras.sort(key=lambda c: order.get(c.cam_id, 1 << 30))
    w, h = manifest["size"]
    frames = manifest["frames"]
    images = np.zeros((len(cameras), frames, h, w, 3), dtype=np.uint8)
    for ci, cam in enumerate(cameras):
        for j in range(frames):
            fp = os.path.join(path, cam.cam_id, f"f{j:04d}.png")
            if not os.path.exists(fp):
                raise DatasetFormatError(f"truncated dataset: missing image {fp}")
            img = load_png(fp)
            if img.shape != (h, w, 3):
                raise DatasetFormatError(f"{fp}: size {img.shape} inconsistent with manifest")
            images[ci, j] = img
    scene = manifest.get("scene")
    cfg = None if scene is None else SceneConfig(**_tupled(scene["config"]))
    return MultiViewVideoDataset(
        cameras=cameras,
        images=images,
        fps=float(manifest["fps"]),
        frontal_id=manifest["frontal"],
        scene_seed=None if scene is None else int(scene["seed"]),
        scene_config=cfg,
    )


def _tupled(cfg: dict) -> dict:
    out = dict(cfg)
    for key in ("head_radii", "nose_radii"):
        if key in out and isinstance(out[key], list):
            out[key] = tuple(out[key])
    return out
