"""Calibration dataset: labeled sphere indentations -> (color, position) samples.

Targets come from the analytic sphere-cap gradient inside each labeled
contact circle; the regressor never sees heights, only slopes.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass

import numpy as np

from ..core.types import GradientField, SensorGeometry, TactileFrame
from ..io_common import read_framed, write_framed

MAX_SLOPE = 5.0
DATASET_MAGIC = b"GSCD"
DATASET_VERSION = 1


class RadiusInconsistent(Exception):
    pass


class MissingBackground(Exception):
    pass


class LabelOutsideImage(Exception):
    pass


def sphere_ground_truth_gradients(
    center_px: tuple[float, float],
    contact_radius_px: float,
    sphere_radius_mm: float,
    pixel_pitch: float,
    shape: tuple[int, int] = (240, 240),
) -> GradientField:
    """Analytic cap gradients: h(rho) = sqrt(R^2 - rho^2) - sqrt(R^2 - rc^2)."""
    rc_mm = contact_radius_px * pixel_pitch
    if rc_mm > sphere_radius_mm:
        raise RadiusInconsistent(
            f"contact radius {rc_mm:.2f} mm exceeds sphere radius {sphere_radius_mm} mm"
        )
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w]
    sx = (xx - center_px[0]) * pixel_pitch
    sy = (yy - center_px[1]) * pixel_pitch
    rho2 = sx**2 + sy**2
    inside = rho2 <= rc_mm**2
    root = np.sqrt(np.maximum(sphere_radius_mm**2 - rho2, 1e-18))
    gx = np.where(inside, -sx / root, 0.0)
    gy = np.where(inside, -sy / root, 0.0)
    return GradientField(gx=gx, gy=gy, valid_mask=inside)


@dataclass(frozen=True)
class CalibrationSample:
    """One labeled pixel: signed color change, normalized position, slope target."""

    delta_rgb: tuple[float, float, float]
    pixel_xy: tuple[float, float]
    target_gradient: tuple[float, float]


@dataclass(frozen=True)
class IndentationRecording:
    """One labeled press: frame + background + contact circle + indenter size."""

    frame: TactileFrame
    background: TactileFrame
    circle_center_px: tuple[float, float]
    circle_radius_px: float
    sphere_radius_mm: float


class CalibrationDataset:
    """Column store of calibration samples (struct-of-arrays for speed)."""

    def __init__(self, delta_rgb: np.ndarray, pixel_xy: np.ndarray, targets: np.ndarray):
        self.delta_rgb = np.asarray(delta_rgb, np.float32).reshape(-1, 3)
        self.pixel_xy = np.asarray(pixel_xy, np.float32).reshape(-1, 2)
        self.targets = np.asarray(targets, np.float32).reshape(-1, 2)
        if not (len(self.delta_rgb) == len(self.pixel_xy) == len(self.targets)):
            raise ValueError("column length mismatch")

    def __len__(self) -> int:
        return len(self.targets)

    @property
    def inputs(self) -> np.ndarray:
        """(N, 5) model inputs: three color deltas + two coordinates."""
        return np.concatenate([self.delta_rgb, self.pixel_xy], axis=1)

    def sample(self, i: int) -> CalibrationSample:
        return CalibrationSample(
            delta_rgb=tuple(self.delta_rgb[i]),
            pixel_xy=tuple(self.pixel_xy[i]),
            target_gradient=tuple(self.targets[i]),
        )

    def content_hash(self) -> str:
        hsh = hashlib.sha256()
        for arr in (self.delta_rgb, self.pixel_xy, self.targets):
            hsh.update(arr.tobytes())
        return hsh.hexdigest()[:16]

    def summary(self) -> dict:
        return {
            "count": len(self),
            "target_abs_max": float(np.abs(self.targets).max()) if len(self) else 0.0,
            "dataset_hash": self.content_hash(),
        }

    def save(self, path) -> None:
        payload = struct.pack("<Q", len(self))
        payload += self.delta_rgb.astype("<f4").tobytes()
        payload += self.pixel_xy.astype("<f4").tobytes()
        payload += self.targets.astype("<f4").tobytes()
        write_framed(path, DATASET_MAGIC, DATASET_VERSION, payload)

    @staticmethod
    def load(path) -> "CalibrationDataset":
        payload = read_framed(path, DATASET_MAGIC, DATASET_VERSION)
        (n,) = struct.unpack_from("<Q", payload, 0)
        off = 8
        drgb = np.frombuffer(payload, "<f4", n * 3, off).reshape(n, 3)
        off += n * 12
        pxy = np.frombuffer(payload, "<f4", n * 2, off).reshape(n, 2)
        off += n * 8
        tgt = np.frombuffer(payload, "<f4", n * 2, off).reshape(n, 2)
        return CalibrationDataset(drgb.copy(), pxy.copy(), tgt.copy())


def build_dataset(
    recordings: list[IndentationRecording],
    geom: SensorGeometry,
    max_slope: float = MAX_SLOPE,
    seed: int = 0,
) -> CalibrationDataset:
    """One sample per in-circle pixel, shuffled with a fixed seed."""
    drgb, pxy, tgt = [], [], []
    for rec in recordings:
        if rec.background is None:
            raise MissingBackground("recording carries no background frame")
        if rec.frame.pixels.shape != rec.background.pixels.shape:
            raise MissingBackground("background dimensions differ from frame")
        h, w = rec.frame.height, rec.frame.width
        cx, cy = rec.circle_center_px
        if not (0 <= cx < w and 0 <= cy < h):
            raise LabelOutsideImage(f"label center ({cx}, {cy}) outside {w}x{h}")
        g = sphere_ground_truth_gradients(
            (cx, cy), rec.circle_radius_px, rec.sphere_radius_mm, geom.pixel_pitch, (h, w)
        )
        ys, xs = np.nonzero(g.valid_mask)
        if len(ys) == 0:
            continue
        diff = (
            rec.frame.pixels.astype(np.float32) - rec.background.pixels.astype(np.float32)
        ) / 255.0
        drgb.append(diff[ys, xs])
        pxy.append(
            np.stack([xs / (w - 1.0), ys / (h - 1.0)], axis=1).astype(np.float32)
        )
        t = np.stack([g.gx[ys, xs], g.gy[ys, xs]], axis=1)
        tgt.append(np.clip(t, -max_slope, max_slope).astype(np.float32))

    if not drgb:
        return CalibrationDataset(
            np.zeros((0, 3), np.float32), np.zeros((0, 2), np.float32), np.zeros((0, 2), np.float32)
        )
    drgb = np.concatenate(drgb)
    pxy = np.concatenate(pxy)
    tgt = np.concatenate(tgt)
    order = np.random.default_rng(seed).permutation(len(tgt))
    return CalibrationDataset(drgb[order], pxy[order], tgt[order])


def press_locations(count: int = 20, spread_mm: float = 9.0) -> np.ndarray:
    """Deterministic sunflower pattern of press centers over the window."""
    idx = np.arange(count)
    golden = math.pi * (3.0 - math.sqrt(5.0))
    r = spread_mm * np.sqrt((idx + 0.5) / count)
    th = idx * golden
    return np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
