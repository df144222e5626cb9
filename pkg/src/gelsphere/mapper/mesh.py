"""Triangle-mesh export of fused surfaces: binary STL and ASCII PLY, mm units."""

from __future__ import annotations

import struct

import numpy as np

from .fuse import GlobalSurface


class EmptySurface(Exception):
    pass


def triangulate(surface: GlobalSurface):
    """Grid triangulation: two triangles per fully occupied quad.

    Returns (vertices (N, 3) mm, faces (M, 3) int) with z = fused height.
    """
    occ = surface.occupied
    if not occ.any():
        raise EmptySurface("no occupied cells to mesh")
    h, w = occ.shape
    index = -np.ones((h, w), np.int64)
    ys, xs = np.nonzero(occ)
    index[ys, xs] = np.arange(len(ys))
    wx, wy = surface.world_of_cell(xs, ys)
    verts = np.stack([wx, wy, surface.height[ys, xs]], axis=1)

    quad = occ[:-1, :-1] & occ[:-1, 1:] & occ[1:, :-1] & occ[1:, 1:]
    qy, qx = np.nonzero(quad)
    if len(qy) == 0:
        raise EmptySurface("occupied cells form no complete quads")
    v00 = index[qy, qx]
    v10 = index[qy, qx + 1]
    v01 = index[qy + 1, qx]
    v11 = index[qy + 1, qx + 1]
    # counter-clockwise seen from +z (y axis points down in grid space)
    f1 = np.stack([v00, v11, v10], axis=1)
    f2 = np.stack([v00, v01, v11], axis=1)
    faces = np.concatenate([f1, f2])
    return verts, faces


def face_normals(verts: np.ndarray, faces: np.ndarray) -> np.ndarray:
    a = verts[faces[:, 1]] - verts[faces[:, 0]]
    b = verts[faces[:, 2]] - verts[faces[:, 0]]
    n = np.cross(a, b)
    norm = np.linalg.norm(n, axis=1, keepdims=True)
    return n / np.maximum(norm, 1e-30)


def write_stl(surface: GlobalSurface, path) -> None:
    """Binary STL with computed facet normals."""
    verts, faces = triangulate(surface)
    normals = face_normals(verts, faces)
    with open(path, "wb") as f:
        f.write(b"gelsphere fused surface (mm)".ljust(80, b"\0"))
        f.write(struct.pack("<I", len(faces)))
        tri = np.empty((len(faces), 12), np.float32)
        tri[:, 0:3] = normals
        tri[:, 3:6] = verts[faces[:, 0]]
        tri[:, 6:9] = verts[faces[:, 1]]
        tri[:, 9:12] = verts[faces[:, 2]]
        body = np.zeros((len(faces), 50), np.uint8)
        body[:, :48] = tri.astype("<f4").view(np.uint8).reshape(len(faces), 48)
        f.write(body.tobytes())


def write_ply(surface: GlobalSurface, path) -> None:
    """ASCII PLY with per-vertex normals."""
    verts, faces = triangulate(surface)
    occ = surface.occupied
    ys, xs = np.nonzero(occ)
    vnorm = surface.normal[ys, xs]
    lines = [
        "ply",
        "format ascii 1.0",
        "comment units millimetres",
        f"element vertex {len(verts)}",
        "property float x",
        "property float y",
        "property float z",
        "property float nx",
        "property float ny",
        "property float nz",
        f"element face {len(faces)}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    for v, n in zip(verts, vnorm):
        lines.append(
            f"{v[0]:.6f} {v[1]:.6f} {v[2]:.6f} {n[0]:.6f} {n[1]:.6f} {n[2]:.6f}"
        )
    for f3 in faces:
        lines.append(f"3 {f3[0]} {f3[1]} {f3[2]}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def edge_manifold_ok(faces: np.ndarray) -> bool:
    """Every interior edge shared by at most two faces."""
    from collections import Counter

    cnt = Counter()
    for f3 in faces:
        for a, b in ((f3[0], f3[1]), (f3[1], f3[2]), (f3[2], f3[0])):
            cnt[(min(a, b), max(a, b))] += 1
    return all(v <= 2 for v in cnt.values())
