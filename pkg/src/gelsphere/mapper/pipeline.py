"""Online tactile SLAM: ordered frame consumption, keyframing, loop closure.

Frame-to-frame odometry tracks the pose (constant-velocity init); keyframe
pairs get their own alignment for graph edges; loop closures trigger a
graph re-optimization that republishes corrected keyframe poses.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import se2
from ..core.types import ContactMask, HeightMap, NormalMap, PlanarPose, SensorGeometry
from .fuse import GlobalSurface, fuse
from .graph import Edge, PoseGraph, optimize_graph
from .keyframe import Keyframe, select_keyframe
from .loop import detect_loop
from .odometry import InsufficientOverlap, MotionEstimate, NoConvergence, estimate_motion

DEGENERATE_INFO_SCALE = 1e-3


@dataclass
class SlamConfig:
    loop_seed: int = 0
    optimize_on_loop: bool = True
    min_keyframe_pixels: int = 200


@dataclass
class FrameResult:
    frame_id: int
    pose: PlanarPose
    is_keyframe: bool
    tracked: bool
    loop_edges: int = 0


@dataclass
class TactileSlam:
    geom: SensorGeometry
    config: SlamConfig = field(default_factory=SlamConfig)

    def __post_init__(self):
        self.graph = PoseGraph()
        self.keyframes: list[Keyframe] = []
        self.pose = PlanarPose()
        self.last_delta = PlanarPose()
        self._prev: tuple[NormalMap, np.ndarray] | None = None
        self._optimized = False

    def _add_keyframe(
        self,
        frame_id: int,
        normals: NormalMap,
        mask: ContactMask,
        heights: HeightMap,
    ) -> tuple[Keyframe, int]:
        kf = Keyframe(
            frame_id=frame_id,
            pose=self.pose,
            normals=normals,
            contact_mask=mask,
            heights=heights,
        )
        kf_id = len(self.keyframes)
        self.keyframes.append(kf)
        self.graph.add_node(kf_id, kf.pose)
        return kf, kf_id

    def process(
        self,
        normals: NormalMap,
        mask: ContactMask,
        heights: HeightMap,
        frame_id: int,
    ) -> FrameResult:
        """Consume one frame's maps; returns the tracked pose.

        Poses are relative to the first frame (gauge), which becomes
        keyframe 0 at the identity.
        """
        valid = normals.valid_mask & mask.raster
        if not self.keyframes:
            if valid.sum() < self.config.min_keyframe_pixels:
                return FrameResult(frame_id, self.pose, False, False)
            self._add_keyframe(frame_id, normals, mask, heights)
            self._prev = (normals, valid)
            return FrameResult(frame_id, self.pose, True, True)

        prev_nm, prev_valid = self._prev
        tracked = True
        try:
            est = estimate_motion(
                prev_nm, prev_valid, normals, valid, self.geom, init=self.last_delta
            )
            delta = est.delta
            if est.degenerate:
                # unobservable motion: keep the constant-velocity prediction
                delta = self.last_delta
                tracked = False
        except (InsufficientOverlap, NoConvergence):
            delta = self.last_delta
            tracked = False
        self.pose = se2.compose(self.pose, delta)
        self.last_delta = delta
        self._prev = (normals, valid)

        last_kf = self.keyframes[-1]
        result = FrameResult(frame_id, self.pose, False, tracked)
        if valid.sum() >= self.config.min_keyframe_pixels and select_keyframe(
            last_kf.pose, self.pose, last_kf.contact_diameter_mm
        ):
            result.is_keyframe = True
            kf, kf_id = self._add_keyframe(frame_id, normals, mask, heights)
            edge_meas, edge_info = self._keyframe_edge(last_kf, kf)
            self.graph.add_edge(
                Edge(
                    i=kf_id - 1,
                    j=kf_id,
                    measurement=edge_meas,
                    information=edge_info,
                    kind="odometry",
                )
            )
            loops = detect_loop(
                kf, self.keyframes[:-1], self.geom, seed=self.config.loop_seed
            )
            result.loop_edges = len(loops)
            for prior_id, rel, info in loops:
                self.graph.add_edge(
                    Edge(i=prior_id, j=kf_id, measurement=rel, information=info, kind="loop")
                )
            if loops and self.config.optimize_on_loop:
                self.optimize()
        return result

    def _keyframe_edge(self, kf_a: Keyframe, kf_b: Keyframe):
        """Direct alignment between consecutive keyframes for the graph edge."""
        init = se2.relative(kf_a.pose, kf_b.pose)
        try:
            est = estimate_motion(
                kf_a.normals,
                kf_a.normals.valid_mask & kf_a.contact_mask.raster,
                kf_b.normals,
                kf_b.normals.valid_mask & kf_b.contact_mask.raster,
                self.geom,
                init=init,
            )
            if not est.degenerate:
                return est.delta, est.information
            return init, est.information * DEGENERATE_INFO_SCALE + 1e-4 * np.eye(3)
        except (InsufficientOverlap, NoConvergence):
            return init, 1e-2 * np.eye(3)

    def optimize(self) -> None:
        """Re-optimize the graph and republish corrected poses."""
        before_last = self.keyframes[-1].pose
        rel_track = se2.relative(before_last, self.pose)
        optimized = optimize_graph(self.graph)
        self.graph = optimized
        for kf_id, kf in enumerate(self.keyframes):
            kf.pose = optimized.nodes[kf_id]
        # the tracking pose rides along with its keyframe's correction
        self.pose = se2.compose(self.keyframes[-1].pose, rel_track)
        self._optimized = True

    def fuse_surface(self, pitch_mm: float | None = None) -> GlobalSurface:
        return fuse(
            self.keyframes, [kf.pose for kf in self.keyframes], self.geom, pitch_mm
        )

    def odometry_only_poses(self) -> dict[int, PlanarPose]:
        """Chain the odometry edges alone (drift baseline, no loops)."""
        poses = {0: PlanarPose()}
        for e in self.graph.edges:
            if e.kind == "odometry" and e.i in poses:
                poses[e.j] = se2.compose(poses[e.i], e.measurement)
        return poses
