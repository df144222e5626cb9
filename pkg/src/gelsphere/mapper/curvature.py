"""Mean-curvature maps from normal maps.

Curvature is illumination-invariant, which is why registration runs on it.
For a graph surface the mean curvature is half the divergence of the unit
normal's in-plane components; using the unit components (rather than the
slope field) keeps it exact on steep geometry.  Sign convention: a bump
pressed into the gel (sphere cap of radius R) has curvature +1/R, a dent
-1/R.
"""

from __future__ import annotations

import numpy as np

from ..core.types import NormalMap


def curvature_map(n: NormalMap, pixel_pitch: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel mean curvature (1/mm) and its validity mask.

    kappa = 0.5 * (d(nx)/dx + d(ny)/dy) by central differences; boundary
    pixels and pixels with invalid neighbors are invalid.
    """
    nx, ny = n.nx, n.ny
    h, w = nx.shape
    dnx = np.zeros((h, w))
    dny = np.zeros((h, w))
    dnx[:, 1:-1] = (nx[:, 2:] - nx[:, :-2]) / (2.0 * pixel_pitch)
    dny[1:-1, :] = (ny[2:, :] - ny[:-2, :]) / (2.0 * pixel_pitch)
    kappa = 0.5 * (dnx + dny)

    ok = n.valid_mask.copy()
    ok[0, :] = ok[-1, :] = False
    ok[:, 0] = ok[:, -1] = False
    inner = n.valid_mask
    ok[1:-1, 1:-1] &= (
        inner[1:-1, 2:] & inner[1:-1, :-2] & inner[2:, 1:-1] & inner[:-2, 1:-1]
    )
    kappa[~ok] = 0.0
    return kappa, ok
