"""Keyframes and the keyframe selection rule."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core.types import ContactMask, HeightMap, NormalMap, PlanarPose
from .curvature import curvature_map
from .sift import Keypoint, compute_descriptors, detect_keypoints

TRANSLATION_FRACTION = 0.40  # of contact diameter
ROTATION_THRESHOLD_DEG = 10.0


def select_keyframe(
    last_kf_pose: PlanarPose,
    cur_pose: PlanarPose,
    contact_diameter_mm: float,
    translation_fraction: float = TRANSLATION_FRACTION,
    rotation_threshold_deg: float = ROTATION_THRESHOLD_DEG,
) -> bool:
    """True when motion since the last keyframe warrants a new one."""
    dt = math.hypot(cur_pose.x - last_kf_pose.x, cur_pose.y - last_kf_pose.y)
    dr = abs((cur_pose.theta - last_kf_pose.theta + math.pi) % (2 * math.pi) - math.pi)
    return (
        dt >= translation_fraction * contact_diameter_mm
        or dr >= math.radians(rotation_threshold_deg)
    )


@dataclass
class Keyframe:
    frame_id: int
    pose: PlanarPose
    normals: NormalMap
    contact_mask: ContactMask
    heights: HeightMap
    curvature: np.ndarray = None
    curvature_valid: np.ndarray = None
    keypoints: list[Keypoint] = field(default=None)
    descriptors: np.ndarray = None

    def __post_init__(self):
        if not (
            self.normals.shape == self.heights.shape == self.contact_mask.shape
        ):
            raise ValueError("keyframe maps must share dimensions")
        if not (
            np.isfinite(self.pose.x) and np.isfinite(self.pose.y) and np.isfinite(self.pose.theta)
        ):
            raise ValueError("keyframe pose must be finite")
        if self.curvature is None:
            self.curvature, self.curvature_valid = curvature_map(
                self.normals, self.heights.pixel_pitch
            )
            self.curvature_valid &= self.contact_mask.raster

    def features(self):
        """Lazily detected keypoints + descriptors on the curvature map."""
        if self.keypoints is None:
            self.keypoints = detect_keypoints(self.curvature, self.curvature_valid)
            self.descriptors = compute_descriptors(
                self.curvature, self.curvature_valid, self.keypoints
            )
        return self.keypoints, self.descriptors

    @property
    def contact_diameter_mm(self) -> float:
        return 2.0 * self.contact_mask.radius * self.heights.pixel_pitch
