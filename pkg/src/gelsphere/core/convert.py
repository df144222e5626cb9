"""Conversions between gradient fields and normal maps.

n = (-gx, -gy, 1) / ||.||  and the inverse  g = (-nx/nz, -ny/nz).
"""

from __future__ import annotations

import numpy as np

from .types import GradientField, NormalMap

# nz below this is treated as an invalid (grazing) normal.
MIN_NZ = 1e-6


def gradients_to_normals(g: GradientField) -> NormalMap:
    """Unit normals from surface slopes; invalid pixels stay invalid."""
    norm = np.sqrt(g.gx**2 + g.gy**2 + 1.0)
    n = np.stack([-g.gx / norm, -g.gy / norm, 1.0 / norm], axis=-1)
    invalid = ~g.valid_mask
    n[invalid] = (0.0, 0.0, 1.0)
    return NormalMap(n=n, valid_mask=g.valid_mask.copy())


def normals_to_gradients(n: NormalMap) -> GradientField:
    """Surface slopes from unit normals; pixels with nz <= MIN_NZ marked invalid."""
    nz = n.nz
    ok = n.valid_mask & (nz > MIN_NZ)
    safe_nz = np.where(nz > MIN_NZ, nz, 1.0)
    gx = np.where(ok, -n.nx / safe_nz, 0.0)
    gy = np.where(ok, -n.ny / safe_nz, 0.0)
    return GradientField(gx=gx, gy=gy, valid_mask=ok)


def finite_difference_gradient(
    h: np.ndarray, pixel_pitch: float, forward: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Discrete gradient of a height raster.

    forward=False: central differences (one-sided at the borders), the
    second-order estimate used when comparing against analytic fields.
    forward=True: forward differences (g[i] = (h[i+1] - h[i]) / pitch,
    last row/col zero) -- the exact adjoint convention of the Poisson
    integrator's quadratic objective.
    """
    h = np.asarray(h, dtype=np.float64)
    if forward:
        gx = np.zeros_like(h)
        gy = np.zeros_like(h)
        gx[:, :-1] = (h[:, 1:] - h[:, :-1]) / pixel_pitch
        gy[:-1, :] = (h[1:, :] - h[:-1, :]) / pixel_pitch
        return gx, gy
    gy, gx = np.gradient(h, pixel_pitch)
    return gx, gy
