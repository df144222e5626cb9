"""Sphere-on-scene contact geometry with a Hertz-style depth law.

Rigid-geometry model: the gel sphere lowers onto the scene until it has
penetrated `depth` past first contact; the gel conforms to the scene
wherever the relief rises above the sphere's penetration envelope.
"""

from __future__ import annotations

import math

import numpy as np

from ..core.types import ContactMask, HeightMap, NormalMap, SensorGeometry
from ..core.types import PlanarPose
from .scene import OutOfBounds, Scene

# Calibrated so 15 N of normal force presses the gel 2.0 mm deep.
HERTZ_DEPTH_AT_15N = 2.0
HERTZ_EXPONENT = 2.0 / 3.0
HERTZ_C = HERTZ_DEPTH_AT_15N / 15.0**HERTZ_EXPONENT


def hertz_depth(force_n: float) -> float:
    """Indentation depth (mm) for a normal force (N); 0 for F <= 0."""
    if force_n <= 0:
        return 0.0
    return HERTZ_C * force_n**HERTZ_EXPONENT


def hertz_force(depth_mm: float) -> float:
    if depth_mm <= 0:
        return 0.0
    return (depth_mm / HERTZ_C) ** (1.0 / HERTZ_EXPONENT)


def flat_contact_radius(depth_mm: float, gel_radius: float) -> float:
    """Sphere-plane intersection radius sqrt(2 R d - d^2)."""
    if depth_mm <= 0:
        return 0.0
    return math.sqrt(max(2.0 * gel_radius * depth_mm - depth_mm**2, 0.0))


def sensor_grids(geom: SensorGeometry):
    """Per-pixel sensor-frame mm offsets (sx, sy) and apex distance rho."""
    yy, xx = np.mgrid[0 : geom.height, 0 : geom.width]
    sx, sy = geom.pixel_to_mm(xx, yy)
    return sx, sy, np.hypot(sx, sy)


def contact_patch(
    scene: Scene,
    pose: PlanarPose,
    force_n: float,
    geom: SensorGeometry,
) -> tuple[HeightMap, ContactMask, NormalMap]:
    """Ground-truth geometry of one press: heights, circle mask, normals.

    Heights are the scene relief (plate-plane reference, mm) on the sensor
    grid, valid where the gel actually touches; normals are the exact
    analytic scene normals there, expressed in the sensor frame.
    """
    if not scene.contains(pose.x, pose.y):
        raise OutOfBounds(f"pose ({pose.x:.1f}, {pose.y:.1f}) outside plate")

    sx, sy, rho = sensor_grids(geom)
    ct, st = math.cos(pose.theta), math.sin(pose.theta)
    wx = pose.x + ct * sx - st * sy
    wy = pose.y + st * sx + ct * sy

    h_s, gwx, gwy = scene.relief_and_gradient(wx, wy)
    # world-frame gradient -> sensor frame: g_s = R(-theta) g_w
    gx = ct * gwx + st * gwy
    gy = -st * gwx + ct * gwy

    sag = geom.sphere_sag(rho)
    reach = rho < 0.98 * geom.gel_radius
    depth = hertz_depth(force_n)

    shape = (geom.height, geom.width)
    if depth <= 0.0:
        hm = HeightMap(h=np.zeros(shape), pixel_pitch=geom.pixel_pitch, valid_mask=np.zeros(shape, bool))
        mask = ContactMask(center=geom.optical_center, radius=0.0, shape=shape)
        nm = NormalMap(n=_flat(shape), valid_mask=np.zeros(shape, bool))
        return hm, mask, nm

    # gel first touches the max of (relief - sag); pressing `depth` past it
    clearance = np.where(reach, h_s - sag, -np.inf)
    z_first = clearance.max()
    contact = reach & (clearance >= z_first - depth)

    norm = np.sqrt(gx**2 + gy**2 + 1.0)
    n = np.stack([-gx / norm, -gy / norm, 1.0 / norm], axis=-1)
    n[~contact] = (0.0, 0.0, 1.0)

    if contact.any():
        radius_px = float(rho[contact].max() / geom.pixel_pitch) + 0.5
    else:
        radius_px = 0.0
    mask = ContactMask(center=geom.optical_center, radius=radius_px, shape=shape)

    hm = HeightMap(
        h=np.where(contact, h_s, 0.0),
        pixel_pitch=geom.pixel_pitch,
        valid_mask=contact,
    )
    return hm, mask, NormalMap(n=n, valid_mask=contact)


def _flat(shape):
    n = np.zeros(shape + (3,))
    n[..., 2] = 1.0
    return n
