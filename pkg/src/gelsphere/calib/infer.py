"""Normal-map inference from calibrated models, plus spherical correction."""

from __future__ import annotations

import numpy as np

from ..core.convert import gradients_to_normals
from ..core.types import (
    ContactMask,
    GradientField,
    NormalMap,
    SensorGeometry,
    TactileFrame,
    flat_normal_map,
)
from .dataset import MAX_SLOPE
from .model import GradientModel


def infer_normals(
    frame: TactileFrame,
    background: TactileFrame,
    model: GradientModel,
    mask: ContactMask,
    max_slope: float = MAX_SLOPE,
) -> NormalMap:
    """Regressor slopes inside the mask -> unit normals; flat elsewhere.

    The gradient parameterization guarantees the output satisfies the
    NormalMap invariants (unit length, nz > 0) for any model weights.
    """
    if frame.pixels.shape != background.pixels.shape:
        raise ValueError("frame and background dimensions differ")
    h, w = frame.height, frame.width
    sel = mask.raster
    if not sel.any():
        return flat_normal_map((h, w))

    ys, xs = np.nonzero(sel)
    diff = (
        frame.pixels[ys, xs].astype(np.float64)
        - background.pixels[ys, xs].astype(np.float64)
    ) / 255.0
    pos = np.stack([xs / (w - 1.0), ys / (h - 1.0)], axis=1)
    pred = model.predict(np.concatenate([diff, pos], axis=1))
    pred = np.clip(pred, -max_slope, max_slope)

    gx = np.zeros((h, w))
    gy = np.zeros((h, w))
    gx[ys, xs] = pred[:, 0]
    gy[ys, xs] = pred[:, 1]
    g = GradientField(gx=gx, gy=gy, valid_mask=np.ones((h, w), bool))
    return gradients_to_normals(g)


def _pixel_rotations(geom: SensorGeometry):
    """Per-pixel rotation taking (0,0,1) to the rest sphere's normal."""
    base = geom.rest_sphere_normals().n
    bz = base[..., 2]
    # axis = z_hat x base = (-base_y, base_x, 0), zero at the apex
    ax = -base[..., 1]
    ay = base[..., 0]
    s = np.hypot(ax, ay)
    safe = np.maximum(s, 1e-15)
    kx, ky = ax / safe, ay / safe
    sin_a = s
    cos_a = bz
    return kx, ky, sin_a, cos_a


def _rotate_field(n: np.ndarray, kx, ky, sin_a, cos_a, invert: bool = False):
    """Rodrigues rotation about per-pixel in-plane axes (kz = 0)."""
    if invert:
        sin_a = -sin_a
    vx, vy, vz = n[..., 0], n[..., 1], n[..., 2]
    # k x v with kz = 0
    cx = ky * vz
    cy = -kx * vz
    cz = kx * vy - ky * vx
    kdotv = kx * vx + ky * vy
    f = 1.0 - cos_a
    out = np.empty_like(n)
    out[..., 0] = vx * cos_a + cx * sin_a + kx * kdotv * f
    out[..., 1] = vy * cos_a + cy * sin_a + ky * kdotv * f
    out[..., 2] = vz * cos_a + cz * sin_a
    return out


def correct_for_sphere(n: NormalMap, geom: SensorGeometry) -> NormalMap:
    """Re-express normals relative to the curved rest shape.

    At each pixel the estimated normal is composed with the rotation that
    maps straight-up onto the base sphere's normal there (rotation about
    their common perpendicular).  Pixels whose rotated normal no longer
    faces the camera are marked invalid.
    """
    kx, ky, sin_a, cos_a = _pixel_rotations(geom)
    out = _rotate_field(n.n, kx, ky, sin_a, cos_a)
    valid = n.valid_mask & (out[..., 2] > 1e-6)
    return NormalMap(n=out, valid_mask=valid)


def flatten_from_sphere(n: NormalMap, geom: SensorGeometry) -> NormalMap:
    """Inverse of correct_for_sphere (exact rotation round trip)."""
    kx, ky, sin_a, cos_a = _pixel_rotations(geom)
    out = _rotate_field(n.n, kx, ky, sin_a, cos_a, invert=True)
    valid = n.valid_mask & (out[..., 2] > 1e-6)
    return NormalMap(n=out, valid_mask=valid)
