"""Poisson integration: recover a height map from a gradient field.

Minimizes ||grad(h) - g||^2 over the mask's bounding box with h = 0 on the
box boundary (zero Dirichlet), invalid pixels filled with zero gradient.
The discrete gradient is the forward difference on a staggered lattice:

    sx[i, j] = (h[i, j+1] - h[i, j]) / pitch

so the normal equations are the standard 5-point Laplacian, which a type-I
discrete sine transform diagonalizes exactly.  O(N log N), deterministic.

Co-located input (gradients sampled at pixel centers, the photometric-stereo
case) is resampled onto the staggered lattice by 2-point averaging, which
keeps the reconstruction second-order accurate.  Pass staggered=True when
the input already follows the forward-difference convention (e.g. produced
by finite_difference_gradient(..., forward=True)); then the minimizer
recovers the generating height field exactly.
"""

from __future__ import annotations

import numpy as np
import scipy.fft

from .types import ContactMask, EmptyMask, GradientField, HeightMap, NonFiniteGradient


def _dirichlet_solve(rhs: np.ndarray) -> np.ndarray:
    """Solve (4h - sum of 4-neighbors) = rhs on the interior, h = 0 outside."""
    hi, wi = rhs.shape
    F = scipy.fft.dstn(rhs, type=1)
    k = np.arange(1, hi + 1)
    l = np.arange(1, wi + 1)
    lam = (4.0 - 2.0 * np.cos(np.pi * k / (hi + 1)))[:, None] - 2.0 * np.cos(
        np.pi * l / (wi + 1)
    )[None, :]
    return scipy.fft.idstn(F / lam, type=1)


def integrate_poisson(
    g: GradientField,
    mask: ContactMask,
    pixel_pitch: float,
    staggered: bool = False,
) -> HeightMap:
    """Integrate a gradient field to heights over a circular contact mask.

    Returns a HeightMap on the full frame, zero outside the mask, with the
    mask raster as validity.  Raises EmptyMask / NonFiniteGradient.
    """
    region = mask.raster & g.valid_mask
    if not region.any():
        raise EmptyMask("contact mask selects no valid pixels")
    if not (np.isfinite(g.gx[region]).all() and np.isfinite(g.gy[region]).all()):
        raise NonFiniteGradient("gradient not finite inside mask")

    H, W = g.shape
    ys, xs = np.nonzero(region)
    # Solve box: bounding box padded by one pixel so the Dirichlet ring is
    # outside the data region (clipped at the frame edge).
    top = max(ys.min() - 1, 0)
    bot = min(ys.max() + 2, H)
    left = max(xs.min() - 1, 0)
    right = min(xs.max() + 2, W)

    gx = np.where(region, g.gx, 0.0)[top:bot, left:right]
    gy = np.where(region, g.gy, 0.0)[top:bot, left:right]
    bh, bw = gx.shape
    if bh < 3 or bw < 3:
        # Degenerate region thinner than the stencil: flat answer.
        h = np.zeros((H, W))
        return HeightMap(h=h, pixel_pitch=pixel_pitch, valid_mask=region)

    if staggered:
        sx, sy = gx, gy
    else:
        sx = np.zeros_like(gx)
        sy = np.zeros_like(gy)
        sx[:, :-1] = 0.5 * (gx[:, :-1] + gx[:, 1:])
        sy[:-1, :] = 0.5 * (gy[:-1, :] + gy[1:, :])

    # rhs[m, n] = pitch * (sx[m, n-1] - sx[m, n] + sy[m-1, n] - sy[m, n])
    rhs = np.zeros((bh, bw))
    rhs[:, 1:] += sx[:, :-1]
    rhs -= sx
    rhs[1:, :] += sy[:-1, :]
    rhs -= sy
    rhs *= pixel_pitch

    h_box = np.zeros((bh, bw))
    h_box[1:-1, 1:-1] = _dirichlet_solve(rhs[1:-1, 1:-1])

    h = np.zeros((H, W))
    h[top:bot, left:right] = h_box
    h[~region] = 0.0
    return HeightMap(h=h, pixel_pitch=pixel_pitch, valid_mask=region)
