"""Loop-closure detection: feature matching between revisited keyframes."""

from __future__ import annotations

import math

import numpy as np

from ..core.types import PlanarPose, SensorGeometry
from .keyframe import Keyframe
from .sift import MIN_INLIERS, consensus_rigid_transform, match_descriptors

SEARCH_RADIUS_DIAMETERS = 2.0
SKIP_RECENT = 3
INFO_FLOOR = 1e-3


def _pixels_to_pose(theta_px: float, t_px: np.ndarray, geom: SensorGeometry) -> PlanarPose:
    """Pixel-space rigid transform -> SE(2) pose in sensor mm.

    A pixel map q = R p + t about the origin corresponds, about the optical
    center, to the same rotation with translation re-expressed in mm.
    """
    cx, cy = geom.optical_center
    c, s = math.cos(theta_px), math.sin(theta_px)
    center = np.array([cx, cy])
    t_centered = np.array([c, -s, s, c]).reshape(2, 2) @ center + t_px - center
    return PlanarPose(
        x=t_centered[0] * geom.pixel_pitch,
        y=t_centered[1] * geom.pixel_pitch,
        theta=theta_px,
    )


def match_keyframe_pair(
    kf_a: Keyframe, kf_b: Keyframe, geom: SensorGeometry, seed: int = 0
):
    """Relative pose of b in a's frame from curvature features, or None."""
    kps_a, desc_a = kf_a.features()
    kps_b, desc_b = kf_b.features()
    if len(kps_a) < MIN_INLIERS or len(kps_b) < MIN_INLIERS:
        return None
    matches = match_descriptors(desc_b, desc_a)
    if len(matches) < MIN_INLIERS:
        return None
    pts_b = np.array([[kps_b[i].x, kps_b[i].y] for i, _ in matches])
    pts_a = np.array([[kps_a[j].x, kps_a[j].y] for _, j in matches])
    fit = consensus_rigid_transform(pts_b, pts_a, seed=seed)
    if fit is None:
        return None
    theta, t, inliers = fit
    rel = _pixels_to_pose(theta, t, geom)

    # information from the point-fit Hessian: sum J^T J / sigma^2 with
    # J = [I2 | dR/dtheta p] for each inlier, in mm units
    pitch = geom.pixel_pitch
    cx, cy = geom.optical_center
    pin = (pts_b[inliers] - np.array([cx, cy])) * pitch
    c, s = math.cos(theta), math.sin(theta)
    dRp = np.stack([-s * pin[:, 0] - c * pin[:, 1], c * pin[:, 0] - s * pin[:, 1]], axis=1)
    n = len(pin)
    sigma2 = (1.0 * pitch) ** 2  # ~1 px matching noise
    H = np.zeros((3, 3))
    H[0, 0] = H[1, 1] = n
    H[0, 2] = H[2, 0] = dRp[:, 0].sum()
    H[1, 2] = H[2, 1] = dRp[:, 1].sum()
    H[2, 2] = (dRp**2).sum()
    info = H / sigma2 + INFO_FLOOR * np.eye(3)
    return rel, info, int(inliers.sum())


def detect_loop(
    candidate: Keyframe,
    keyframes: list[Keyframe],
    geom: SensorGeometry,
    search_radius_mm: float | None = None,
    seed: int = 0,
) -> list[tuple[int, PlanarPose, np.ndarray]]:
    """Loop constraints (kf_index, relative pose, information) for a keyframe.

    Prior keyframes within the search radius, excluding the most recent
    SKIP_RECENT, are feature-matched; accepted fits become constraints.
    Empty list when nothing matches.
    """
    if search_radius_mm is None:
        search_radius_mm = SEARCH_RADIUS_DIAMETERS * max(
            candidate.contact_diameter_mm, 1e-6
        )
    out = []
    eligible = keyframes[:-SKIP_RECENT] if len(keyframes) > SKIP_RECENT else []
    for idx, kf in enumerate(eligible):
        d = math.hypot(kf.pose.x - candidate.pose.x, kf.pose.y - candidate.pose.y)
        if d > search_radius_mm:
            continue
        hit = match_keyframe_pair(kf, candidate, geom, seed=seed + idx)
        if hit is None:
            continue
        rel, info, _ = hit
        out.append((idx, rel, info))
    return out
