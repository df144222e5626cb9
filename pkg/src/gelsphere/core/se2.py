"""SE(2) algebra on PlanarPose: composition, inverse, point transforms.

Poses act on points as p' = R(theta) @ p + t.  compose(a, b) is "a then b
expressed in a's frame": the pose of frame b in the world when b is given
relative to a.
"""

from __future__ import annotations

import math

import numpy as np

from .types import PlanarPose, wrap_angle


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def compose(a: PlanarPose, b: PlanarPose) -> PlanarPose:
    """World pose of b given b expressed relative to a."""
    c, s = math.cos(a.theta), math.sin(a.theta)
    return PlanarPose(
        x=a.x + c * b.x - s * b.y,
        y=a.y + s * b.x + c * b.y,
        theta=wrap_angle(a.theta + b.theta),
    )


def inverse(a: PlanarPose) -> PlanarPose:
    c, s = math.cos(a.theta), math.sin(a.theta)
    return PlanarPose(
        x=-(c * a.x + s * a.y),
        y=-(-s * a.x + c * a.y),
        theta=wrap_angle(-a.theta),
    )


def apply(a: PlanarPose, point_mm) -> np.ndarray:
    """Transform point(s) from a's frame into the world frame.

    Accepts a single (2,) point or an (N, 2) array.
    """
    p = np.asarray(point_mm, dtype=np.float64)
    c, s = math.cos(a.theta), math.sin(a.theta)
    R = np.array([[c, -s], [s, c]])
    return p @ R.T + np.array([a.x, a.y])


def relative(a: PlanarPose, b: PlanarPose) -> PlanarPose:
    """Pose of b expressed in a's frame: inverse(a) * b."""
    return compose(inverse(a), b)
