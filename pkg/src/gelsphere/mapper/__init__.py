"""Tactile SLAM: odometry, keyframes, loop closure, pose graph, fusion, meshes."""

from .curvature import curvature_map
from .fuse import GlobalSurface, fuse
from .graph import Edge, NotConnected, PoseGraph, optimize_graph
from .keyframe import Keyframe, select_keyframe
from .loop import detect_loop, match_keyframe_pair
from .mesh import EmptySurface, edge_manifold_ok, face_normals, triangulate, write_ply, write_stl
from .odometry import (
    InsufficientOverlap,
    MotionEstimate,
    NoConvergence,
    estimate_motion,
    warp_normal_map,
)
from .pipeline import FrameResult, SlamConfig, TactileSlam

__all__ = [
    "Edge",
    "EmptySurface",
    "FrameResult",
    "GlobalSurface",
    "InsufficientOverlap",
    "Keyframe",
    "MotionEstimate",
    "NoConvergence",
    "NotConnected",
    "PoseGraph",
    "SlamConfig",
    "TactileSlam",
    "curvature_map",
    "detect_loop",
    "edge_manifold_ok",
    "estimate_motion",
    "face_normals",
    "fuse",
    "match_keyframe_pair",
    "optimize_graph",
    "select_keyframe",
    "triangulate",
    "warp_normal_map",
    "write_ply",
    "write_stl",
]
