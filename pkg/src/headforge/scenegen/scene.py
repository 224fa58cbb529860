"""Procedural deforming head scene with exact geometry and correspondences.

The head is a superellipsoid plus a nose ellipsoid (implicit union); eyes and
mouth are painted texture features. Per-frame deformation is a smooth periodic
similarity transform (nod, turn, breathe, bob) that is the identity at frame 0
and exactly invertible, so ground-truth point correspondences across frames
are closed-form.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from ..diffmath.rng import Rng
from ..volren.camera import Camera, generate_rays, pixel_grid

__all__ = ["SceneConfig", "SyntheticScene", "generate_scene", "PALETTES"]

PALETTES = {
    "warm": {
        "base": (0.80, 0.52, 0.38),
        "band1": (0.12, 0.05, -0.04),
        "band2": (0.06, 0.08, -0.02),
        "feature": (0.30, 0.12, 0.10),
    },
    "cool": {
        "base": (0.38, 0.54, 0.80),
        "band1": (-0.04, 0.05, 0.12),
        "band2": (-0.02, 0.08, 0.06),
        "feature": (0.10, 0.14, 0.32),
    },
}


@dataclass(frozen=True)
class SceneConfig:
    palette: str = "warm"
    frames: int = 60
    fps: float = 25.0
    head_radii: Tuple[float, float, float] = (0.50, 0.62, 0.55)
    shape_exponent: float = 2.5
    nose_radii: Tuple[float, float, float] = (0.10, 0.14, 0.16)
    max_nod_deg: float = 10.0
    max_turn_deg: float = 18.0
    max_breathe: float = 0.03
    max_bob: float = 0.04
    texture_freq: float = 1.6
    texture_amp: float = 1.0
    displacement_bound: float = 0.25  # fraction of the largest head radius

    def __post_init__(self):
        if self.palette not in PALETTES:
            raise ValueError(f"unknown palette '{self.palette}'")
        if self.frames < 1:
            raise ValueError("need at least one frame")


class SyntheticScene:
    """One sampled identity: geometry, texture phases, and a motion track."""

    def __init__(self, seed: int, config: SceneConfig):
        self.seed = int(seed)
        self.config = config
        rng = Rng(seed).split("scene")
        u = lambda key, lo, hi: float(rng.split(key).uniform((), lo, hi, dtype=np.float64))

        r = np.asarray(config.head_radii, dtype=np.float64)
        self.head_radii = r * np.array(
            [u("rx", 0.92, 1.08), u("ry", 0.92, 1.08), u("rz", 0.92, 1.08)]
        )
        self.exponent = config.shape_exponent * u("exp", 0.9, 1.1)
        self.nose_center = np.array([0.0, -0.05 * self.head_radii[1], self.head_radii[2] * 0.92])
        self.nose_radii = np.asarray(config.nose_radii, dtype=np.float64)

        # motion track (periodic, zero phase => identity at frame 0)
        self.nod_amp = np.deg2rad(config.max_nod_deg) * u("nod", 0.5, 1.0)
        self.turn_amp = np.deg2rad(config.max_turn_deg) * u("turn", 0.6, 1.0)
        self.breathe_amp = config.max_breathe * u("breathe", 0.4, 1.0)
        self.bob_amp = config.max_bob * u("bob", 0.4, 1.0)
        self.nod_cycles = int(rng.split("nodc").integers(1, 3))
        self.turn_cycles = 1

        # texture band directions and phases
        d1 = rng.split("band1").normal((3,), dtype=np.float64)
        d2 = rng.split("band2").normal((3,), dtype=np.float64)
        self.band_dir1 = d1 / np.linalg.norm(d1)
        self.band_dir2 = d2 / np.linalg.norm(d2)
        self.band_phase1 = u("phase1", 0.0, 2 * np.pi)
        self.band_phase2 = u("phase2", 0.0, 2 * np.pi)

        self.bounding_radius = float(np.max(self.head_radii) * (1.0 + config.max_breathe) + config.max_bob + 0.08)
        self._fit_displacement_bound()

    # -- deformation track -------------------------------------------------
    def _angles(self, frame: int) -> Tuple[float, float, float, float]:
        m = max(self.config.frames, 1)
        ph = 2.0 * np.pi * frame / m
        nod = self.nod_amp * np.sin(self.nod_cycles * ph)
        turn = self.turn_amp * np.sin(self.turn_cycles * ph)
        scale = 1.0 + self.breathe_amp * np.sin(ph)
        bob = self.bob_amp * np.sin(2.0 * ph)
        return nod, turn, scale, bob

    def frame_transform(self, frame: int) -> Tuple[np.ndarray, np.ndarray, float]:
        """(R, t, s): canonical -> world at `frame` is x = s * R @ x0 + t."""
        nod, turn, scale, bob = self._angles(frame)
        cn, sn = np.cos(nod), np.sin(nod)
        ct, st = np.cos(turn), np.sin(turn)
        rx = np.array([[1, 0, 0], [0, cn, -sn], [0, sn, cn]])
        ry = np.array([[ct, 0, st], [0, 1, 0], [-st, 0, ct]])
        return rx @ ry, np.array([0.0, bob, 0.0]), scale

    def from_canonical(self, x0: np.ndarray, frame: int) -> np.ndarray:
        R, t, s = self.frame_transform(frame)
        return s * (np.asarray(x0) @ R.T) + t

    def to_canonical(self, x: np.ndarray, frame: int) -> np.ndarray:
        R, t, s = self.frame_transform(frame)
        return ((np.asarray(x) - t) / s) @ R

    def max_displacement(self) -> float:
        """Upper bound on |x - x0| over the head surface and all frames."""
        r = float(np.max(self.head_radii))
        worst = 0.0
        for j in range(self.config.frames):
            R, t, s = self.frame_transform(j)
            op = np.linalg.norm(s * R - np.eye(3), ord=2)
            worst = max(worst, op * r + np.linalg.norm(t))
        return worst

    def _fit_displacement_bound(self):
        bound = self.config.displacement_bound * float(np.max(self.head_radii))
        for _ in range(8):
            worst = self.max_displacement()
            if worst <= bound:
                return
            f = 0.98 * bound / worst
            self.nod_amp *= f
            self.turn_amp *= f
            self.breathe_amp *= f
            self.bob_amp *= f
        if self.max_displacement() > bound:  # pragma: no cover
            raise RuntimeError("could not satisfy displacement bound")

    # -- geometry ----------------------------------------------------------
    def _implicit(self, x0: np.ndarray) -> np.ndarray:
        """Union implicit; negative inside. x0 (...,3) canonical."""
        u = np.abs(x0 / self.head_radii)
        head = (u**self.exponent).sum(axis=-1) - 1.0
        v = (x0 - self.nose_center) / self.nose_radii
        nose = (v**2).sum(axis=-1) - 1.0
        return np.minimum(head, nose)

    def surface_normal(self, x0: np.ndarray) -> np.ndarray:
        """Canonical outward normal of the active union component."""
        x0 = np.asarray(x0, dtype=np.float64)
        u = np.abs(x0 / self.head_radii)
        head = (u**self.exponent).sum(axis=-1) - 1.0
        v = (x0 - self.nose_center) / self.nose_radii
        nose = (v**2).sum(axis=-1) - 1.0
        g_head = (
            self.exponent
            * np.abs(x0 / self.head_radii) ** (self.exponent - 1.0)
            * np.sign(x0)
            / self.head_radii
        )
        g_nose = 2.0 * v / self.nose_radii
        g = np.where((head <= nose)[..., None], g_head, g_nose)
        return g / np.linalg.norm(g, axis=-1, keepdims=True)

    def _ray_hit_canonical(
        self, o0: np.ndarray, d0: np.ndarray, steps: int = 128, refine: int = 30
    ) -> Tuple[np.ndarray, np.ndarray]:
        """First surface hit t along canonical rays x0 = o0 + t*d0.

        d0 need not be unit; t is in the caller's parameterization. Returns
        (t_hit, hit_mask).
        """
        a = (d0 * d0).sum(-1)
        b = (o0 * d0).sum(-1)
        c = (o0 * o0).sum(-1) - self.bounding_radius**2
        disc = b * b - a * c
        hit_sphere = disc > 0
        sq = np.sqrt(np.maximum(disc, 0.0))
        t0 = np.maximum((-b - sq) / a, 1e-6)
        t1 = (-b + sq) / a
        t0 = np.where(hit_sphere, t0, 0.0)
        t1 = np.where(hit_sphere & (t1 > t0), t1, t0 + 1e-6)

        ts = t0[:, None] + (t1 - t0)[:, None] * np.linspace(0.0, 1.0, steps)[None, :]
        vals = self._implicit(o0[:, None, :] + ts[..., None] * d0[:, None, :])
        inside = vals < 0.0
        first = inside.argmax(axis=1)  # 0 when no crossing
        hit = inside.any(axis=1) & (first > 0) & hit_sphere

        idx = np.maximum(first, 1)
        lo = np.take_along_axis(ts, (idx - 1)[:, None], axis=1)[:, 0]
        hi = np.take_along_axis(ts, idx[:, None], axis=1)[:, 0]
        for _ in range(refine):
            mid = 0.5 * (lo + hi)
            fm = self._implicit(o0 + mid[:, None] * d0)
            neg = fm < 0.0
            hi = np.where(neg, mid, hi)
            lo = np.where(neg, lo, mid)
        t_hit = 0.5 * (lo + hi)
        return np.where(hit, t_hit, np.inf), hit

    # -- texture -----------------------------------------------------------
    def albedo(self, x0: np.ndarray) -> np.ndarray:
        """Flat (view-independent) surface color at canonical points (...,3)."""
        cfg = self.config
        pal = PALETTES[cfg.palette]
        x0 = np.asarray(x0, dtype=np.float64)
        base = np.array(pal["base"])
        b1 = np.array(pal["band1"]) * cfg.texture_amp
        b2 = np.array(pal["band2"]) * cfg.texture_amp
        s1 = np.sin(2 * np.pi * cfg.texture_freq * (x0 @ self.band_dir1) + self.band_phase1)
        s2 = np.sin(2 * np.pi * cfg.texture_freq * (x0 @ self.band_dir2) + self.band_phase2)
        col = base + s1[..., None] * b1 + s2[..., None] * b2

        u = x0 / self.head_radii  # normalized head coordinates
        eye_l = np.array([-0.42, 0.28, 0.82])
        eye_r = np.array([0.42, 0.28, 0.82])
        feat = np.array(pal["feature"])
        for eye in (eye_l, eye_r):
            m = np.linalg.norm(u - eye, axis=-1) < 0.22
            col = np.where(m[..., None], feat, col)
        mouth = (np.abs(u[..., 1] + 0.45) < 0.10) & (np.abs(u[..., 0]) < 0.38) & (u[..., 2] > 0.55)
        col = np.where(mouth[..., None], feat * 0.9, col)
        return np.clip(col, 0.03, 0.97)

    # -- rendering ---------------------------------------------------------
    def render(self, camera: Camera, frame: int, background: float = 1.0) -> np.ndarray:
        """Analytic ray-surface render, (H, W, 3) float32 in [0, 1]."""
        if frame >= self.config.frames:
            raise ValueError(f"frame {frame} out of range [0, {self.config.frames})")
        rays = generate_rays(camera, pixel_grid(camera.width, camera.height))
        R, t, s = self.frame_transform(frame)
        o0 = ((rays.origins - t) / s) @ R
        d0 = (rays.directions @ R) / s
        t_hit, hit = self._ray_hit_canonical(o0, d0)
        img = np.full((len(rays), 3), float(background))
        if hit.any():
            pts = o0[hit] + t_hit[hit, None] * d0[hit]
            img[hit] = self.albedo(pts)
        return img.reshape(camera.height, camera.width, 3).astype(np.float32)

    # -- exact correspondences ----------------------------------------------
    def sample_surface_points(self, rng: Rng, n: int, front_only: bool = False) -> np.ndarray:
        """Canonical points on the head surface (radial projection, exact)."""
        dirs = rng.split("surface").normal((n, 3), dtype=np.float64)
        dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        if front_only:
            dirs[:, 2] = np.abs(dirs[:, 2]) + 0.2
            dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        u = np.abs(dirs / self.head_radii)
        rho = ((u**self.exponent).sum(axis=-1)) ** (-1.0 / self.exponent)
        return dirs * rho[:, None]

    def project_point(self, camera: Camera, frame: int, x0: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Pixel coordinates of canonical points at `frame`, plus visibility.

        A point is visible when the first surface hit along its viewing ray
        coincides with the point (no self-occlusion) and it projects inside
        the image.
        """
        x0 = np.asarray(x0, dtype=np.float64).reshape(-1, 3)
        xw = self.from_canonical(x0, frame)
        px, depth = camera.project(xw)
        inside = (
            (depth > 0)
            & (px[:, 0] >= 0.5) & (px[:, 0] <= camera.width - 0.5)
            & (px[:, 1] >= 0.5) & (px[:, 1] <= camera.height - 0.5)
        )
        origin = camera.center
        d = xw - origin
        dist = np.linalg.norm(d, axis=-1)
        d /= dist[:, None]
        R, t, s = self.frame_transform(frame)
        o0 = np.broadcast_to(((origin - t) / s) @ R, x0.shape).copy()
        d0 = (d @ R) / s
        t_hit, hit = self._ray_hit_canonical(o0, d0)
        unoccluded = hit & (np.abs(t_hit - dist) < 1e-3 * self.bounding_radius)
        return px, inside & unoccluded


def generate_scene(seed: int, config: Optional[SceneConfig] = None) -> SyntheticScene:
    """Deterministic per (seed, config)."""
    return SyntheticScene(seed, config or SceneConfig())
