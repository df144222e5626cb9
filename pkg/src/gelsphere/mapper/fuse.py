"""Fusion of posed contact patches into a world-frame surface mosaic."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..core.types import PlanarPose, SensorGeometry
from .keyframe import Keyframe

GRID_MARGIN_MM = 2.0


@dataclass
class GlobalSurface:
    """World grid of fused heights/normals with accumulation weights."""

    origin_mm: tuple[float, float]  # world coords of cell (0, 0)
    pitch_mm: float
    height: np.ndarray  # (H, W) fused heights, mm
    normal: np.ndarray  # (H, W, 3) fused unit normals
    weight: np.ndarray  # (H, W) accumulated weight, 0 = empty

    @property
    def occupied(self) -> np.ndarray:
        return self.weight > 0.0

    @property
    def bounds_mm(self) -> tuple[float, float, float, float]:
        h, w = self.weight.shape
        return (
            self.origin_mm[0],
            self.origin_mm[1],
            self.origin_mm[0] + (w - 1) * self.pitch_mm,
            self.origin_mm[1] + (h - 1) * self.pitch_mm,
        )

    def world_of_cell(self, ix: np.ndarray, iy: np.ndarray):
        return (
            self.origin_mm[0] + np.asarray(ix) * self.pitch_mm,
            self.origin_mm[1] + np.asarray(iy) * self.pitch_mm,
        )

    def cell_of_world(self, x: np.ndarray, y: np.ndarray):
        return (
            (np.asarray(x) - self.origin_mm[0]) / self.pitch_mm,
            (np.asarray(y) - self.origin_mm[1]) / self.pitch_mm,
        )

    def to_bytes(self) -> bytes:
        """Deterministic snapshot encoding (used by determinism checks)."""
        import struct

        head = struct.pack(
            "<2d d 2q",
            self.origin_mm[0],
            self.origin_mm[1],
            self.pitch_mm,
            self.height.shape[0],
            self.height.shape[1],
        )
        return (
            head
            + self.height.astype("<f8").tobytes()
            + self.normal.astype("<f8").tobytes()
            + self.weight.astype("<f8").tobytes()
        )

    def save(self, path) -> None:
        with open(path, "wb") as f:
            f.write(b"GSGS" + self.to_bytes())

    @staticmethod
    def load(path) -> "GlobalSurface":
        import struct

        raw = open(path, "rb").read()
        if raw[:4] != b"GSGS":
            raise ValueError("not a surface snapshot file")
        ox, oy, pitch, h, w = struct.unpack_from("<2d d 2q", raw, 4)
        off = 4 + struct.calcsize("<2d d 2q")
        h, w = int(h), int(w)
        height = np.frombuffer(raw, "<f8", h * w, off).reshape(h, w).copy()
        off += h * w * 8
        normal = np.frombuffer(raw, "<f8", h * w * 3, off).reshape(h, w, 3).copy()
        off += h * w * 24
        weight = np.frombuffer(raw, "<f8", h * w, off).reshape(h, w).copy()
        return GlobalSurface((ox, oy), pitch, height, normal, weight)


def _keyframe_world_samples(kf: Keyframe, pose: PlanarPose, geom: SensorGeometry):
    """Valid pixels -> (world xy, heights, world normals, center weights)."""
    sel = kf.normals.valid_mask & kf.contact_mask.raster
    ys, xs = np.nonzero(sel)
    if len(ys) == 0:
        return None
    sx, sy = geom.pixel_to_mm(xs, ys)
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    wx = pose.x + c * sx - s * sy
    wy = pose.y + s * sx + c * sy

    n = kf.normals.n[ys, xs]
    nw = np.empty_like(n)
    nw[:, 0] = c * n[:, 0] - s * n[:, 1]
    nw[:, 1] = s * n[:, 0] + c * n[:, 1]
    nw[:, 2] = n[:, 2]

    cx, cy = kf.contact_mask.center
    r_mask = max(kf.contact_mask.radius, 1.0)
    rho = np.hypot(xs - cx, ys - cy) / r_mask
    w = np.maximum(1.0 - rho**2, 0.0)

    h = kf.heights.h[ys, xs]
    return np.stack([wx, wy], axis=1), h, nw, w


def fuse(
    keyframes: list[Keyframe],
    poses: list[PlanarPose],
    geom: SensorGeometry,
    pitch_mm: float | None = None,
) -> GlobalSurface:
    """Center-weighted accumulation of keyframe patches on a world grid.

    Weighted means commute, so insertion order cannot change the result
    beyond float rounding.
    """
    if len(keyframes) != len(poses):
        raise ValueError("keyframes and poses length mismatch")
    pitch = pitch_mm if pitch_mm is not None else geom.pixel_pitch

    samples = []
    for kf, pose in zip(keyframes, poses):
        s = _keyframe_world_samples(kf, pose, geom)
        if s is not None:
            samples.append(s)
    if not samples:
        return GlobalSurface((0.0, 0.0), pitch, np.zeros((1, 1)), np.zeros((1, 1, 3)), np.zeros((1, 1)))

    all_xy = np.concatenate([s[0] for s in samples])
    x0 = all_xy[:, 0].min() - GRID_MARGIN_MM
    y0 = all_xy[:, 1].min() - GRID_MARGIN_MM
    x1 = all_xy[:, 0].max() + GRID_MARGIN_MM
    y1 = all_xy[:, 1].max() + GRID_MARGIN_MM
    gw = int(math.ceil((x1 - x0) / pitch)) + 2
    gh = int(math.ceil((y1 - y0) / pitch)) + 2

    acc = np.zeros((gh, gw, 4))  # height + normal xyz, weighted sums
    acc_w = np.zeros((gh, gw))
    for xy, h, nw, w in samples:
        u = (xy[:, 0] - x0) / pitch
        v = (xy[:, 1] - y0) / pitch
        vals = np.concatenate([h[:, None], nw], axis=1)
        kernels.splat_add(vals, w, u, v, acc, acc_w)

    occ = acc_w > 1e-9
    height = np.zeros((gh, gw))
    normal = np.zeros((gh, gw, 3))
    normal[..., 2] = 1.0
    height[occ] = acc[occ, 0] / acc_w[occ]
    nsum = acc[..., 1:4]
    norms = np.linalg.norm(nsum, axis=-1)
    nok = occ & (norms > 1e-12)
    normal[nok] = nsum[nok] / norms[nok, None]
    weight = np.where(occ, acc_w, 0.0)
    return GlobalSurface((x0, y0), pitch, height, normal, weight)
