"""Simulated calibration recordings: sphere presses over the sensing area.

The physical procedure presses 6/7/8 mm indenters on twenty areas each and
labels contact circles by hand; here the simulator exports the labels.
"""

from __future__ import annotations

import numpy as np

from ..core.types import PlanarPose, SensorGeometry
from ..sim.contact import contact_patch
from ..sim.render import DEFAULT_LIGHTS, CoatingModel, Illumination, render, render_background
from ..sim.scene import sphere_scene
from .dataset import IndentationRecording, press_locations

CALIB_RADII_MM = (3.0, 3.5, 4.0)  # 6, 7, 8 mm diameter indenters
CALIB_LOCATIONS = 20
CALIB_FORCES_N = (4.0, 6.0, 8.0)
INDENTER_HEIGHT_MM = 2.0


def simulate_indentation(
    radius_mm: float,
    location_mm: tuple[float, float],
    force_n: float,
    coating: CoatingModel,
    geom: SensorGeometry,
    lights: Illumination = DEFAULT_LIGHTS,
    noise_sigma: float = 2.0 / 255.0,
    rng: np.random.Generator | None = None,
    background=None,
) -> IndentationRecording:
    """One labeled press of a spherical indenter at a window location."""
    scene = sphere_scene(radius_mm=radius_mm, height_mm=INDENTER_HEIGHT_MM)
    # the sensor is moved so the indenter (at the scene origin) lands at
    # `location_mm` in the sensor window
    pose = PlanarPose(-location_mm[0], -location_mm[1], 0.0)
    hm, mask, nm = contact_patch(scene, pose, force_n, geom)

    # label: the indenter's own contact circle (exclude plate contact)
    yy, xx = np.mgrid[0 : geom.height, 0 : geom.width]
    sx, sy = geom.pixel_to_mm(xx, yy)
    d_mm = np.hypot(sx - location_mm[0], sy - location_mm[1])
    base_radius = np.sqrt(2 * radius_mm * INDENTER_HEIGHT_MM - INDENTER_HEIGHT_MM**2)
    sel = hm.valid_mask & (d_mm < base_radius)
    if not sel.any():
        raise ValueError(
            f"indenter did not reach contact at {location_mm} with {force_n} N"
        )
    # conservative label: the largest circle lying fully inside the contact
    # (off-apex contact is slightly asymmetric; no labeled pixel may fall
    # outside the true contact or its target would be inconsistent)
    near = d_mm < base_radius + 1.0
    non_contact = near & ~hm.valid_mask
    if non_contact.any():
        limit_mm = float(d_mm[non_contact].min())
    else:
        limit_mm = float(d_mm[sel].max())
    label_radius_px = max(limit_mm / geom.pixel_pitch - 1.0, 1.0)
    cx_px, cy_px = geom.mm_to_pixel(location_mm[0], location_mm[1])

    frame = render(
        hm, mask, coating, lights, noise_sigma=noise_sigma, geom=geom, normals=nm, rng=rng
    )
    if background is None:
        background = render_background(coating, lights, geom)
    return IndentationRecording(
        frame=frame,
        background=background,
        circle_center_px=(float(cx_px), float(cy_px)),
        circle_radius_px=label_radius_px,
        sphere_radius_mm=radius_mm,
    )


def simulate_calibration_recordings(
    coating: CoatingModel,
    geom: SensorGeometry | None = None,
    lights: Illumination = DEFAULT_LIGHTS,
    radii_mm: tuple[float, ...] = CALIB_RADII_MM,
    locations: int = CALIB_LOCATIONS,
    noise_sigma: float = 2.0 / 255.0,
    seed: int = 0,
) -> list[IndentationRecording]:
    """The full simulated calibration set: len(radii) x locations presses."""
    if geom is None:
        geom = SensorGeometry()
    rng = np.random.default_rng(seed)
    background = render_background(coating, lights, geom)
    locs = press_locations(locations)
    out = []
    for ri, radius in enumerate(radii_mm):
        for li in range(locations):
            force = CALIB_FORCES_N[(ri + li) % len(CALIB_FORCES_N)]
            out.append(
                simulate_indentation(
                    radius,
                    (float(locs[li, 0]), float(locs[li, 1])),
                    force,
                    coating,
                    geom,
                    lights,
                    noise_sigma,
                    rng,
                    background,
                )
            )
    return out
