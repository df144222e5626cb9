"""Photometric rendering of contact patches under tri-color ring lighting.

Simplified analytic shading (Lambertian + Blinn-style specular lobe), one
point-light group per color channel, spaced 120 degrees around the ring so
every direction is lit by some channel.  Pixels outside the contact render
the undeformed gel: the rest sphere's own normals under the same lights,
which is exactly the stored background image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..core.types import (
    ContactMask,
    HeightMap,
    NormalMap,
    SensorGeometry,
    TactileFrame,
)

DEFAULT_NOISE_SIGMA = 2.0 / 255.0
DEFAULT_AMBIENT = 0.10


@dataclass(frozen=True)
class CoatingModel:
    """Reflectance of the gel's outer paint."""

    kind: str  # "specular" | "matte"
    diffuse_albedo: float
    specular_strength: float
    shininess: float

    def __post_init__(self):
        if self.kind not in ("specular", "matte"):
            raise ValueError("kind must be specular or matte")
        if not 0.0 <= self.diffuse_albedo <= 1.0:
            raise ValueError("diffuse_albedo in [0, 1]")
        if self.kind == "matte" and self.specular_strength != 0.0:
            raise ValueError("matte coating must have specular_strength 0")
        if self.kind == "specular" and self.specular_strength <= 0.0:
            raise ValueError("specular coating needs specular_strength > 0")
        if self.shininess <= 0:
            raise ValueError("shininess must be > 0")


SPECULAR_COATING = CoatingModel(
    kind="specular", diffuse_albedo=0.48, specular_strength=0.40, shininess=24.0
)
MATTE_COATING = CoatingModel(
    kind="matte", diffuse_albedo=0.40, specular_strength=0.0, shininess=1.0
)


def coating_by_name(name: str) -> CoatingModel:
    if name == "specular":
        return SPECULAR_COATING
    if name == "matte":
        return MATTE_COATING
    raise ValueError(f"unknown coating {name!r}")


@dataclass(frozen=True)
class Illumination:
    """Three light groups (R, G, B) on a ring over the sensing window.

    Azimuths are 120 degrees apart in the default rig; elevation is shallow
    per the optical design.  Each group is modeled as a point source at
    ring_radius_mm from the optical axis, giving the spatial intensity
    variation the gradient regressor's position input exists to absorb.
    """

    azimuth_deg: tuple[float, float, float] = (90.0, 210.0, 330.0)
    elevation_deg: float = 20.0
    intensity: tuple[float, float, float] = (1.0, 1.0, 1.0)
    ring_radius_mm: float = 40.0

    def __post_init__(self):
        az = self.azimuth_deg
        for i in range(3):
            gap = (az[(i + 1) % 3] - az[i]) % 360.0
            if not (115.0 <= gap <= 125.0):
                raise ValueError("default rig requires azimuth spacing 120 +- 5 deg")

    def positions(self) -> np.ndarray:
        """(3, 3) light positions in sensor mm, z above the window plane."""
        el = math.radians(self.elevation_deg)
        z = self.ring_radius_mm * math.tan(el)
        out = []
        for a in self.azimuth_deg:
            ar = math.radians(a)
            out.append(
                (self.ring_radius_mm * math.cos(ar), self.ring_radius_mm * math.sin(ar), z)
            )
        return np.array(out)

    @property
    def falloff_d0(self) -> float:
        el = math.radians(self.elevation_deg)
        return self.ring_radius_mm / math.cos(el)


DEFAULT_LIGHTS = Illumination()


def unbalanced_lights(boost_channel: int = 2, factor: float = 2.0) -> Illumination:
    """Deliberately unbalanced rig (saturates near the boosted group)."""
    inten = [1.0, 1.0, 1.0]
    inten[boost_channel] = factor
    return Illumination(intensity=tuple(inten))


def _shade_field(
    normals: np.ndarray,
    geom: SensorGeometry,
    coating: CoatingModel,
    lights: Illumination,
) -> np.ndarray:
    sxg, syg = geom.pixel_to_mm(*np.meshgrid(np.arange(geom.width), np.arange(geom.height)))
    surf_z = np.zeros_like(sxg)
    return kernels.shade(
        normals,
        sxg,
        syg,
        surf_z,
        lights.positions(),
        np.asarray(lights.intensity, np.float64),
        lights.falloff_d0,
        DEFAULT_AMBIENT,
        coating.diffuse_albedo,
        coating.specular_strength,
        coating.shininess,
    )


def render(
    patch_height: HeightMap,
    mask: ContactMask,
    coating: CoatingModel,
    lights: Illumination = DEFAULT_LIGHTS,
    noise_sigma: float = 0.0,
    geom: SensorGeometry | None = None,
    normals: NormalMap | None = None,
    rng: np.random.Generator | None = None,
    frame_id: int = 0,
    timestamp_us: int = 0,
    exposure_ms: int = 100,
) -> TactileFrame:
    """Shade one contact patch into an 8-bit tactile frame.

    Contact pixels shade the patch surface normals (the exact ones may be
    passed in; otherwise finite differences of the height map are used);
    everything else shades the rest sphere.
    """
    if geom is None:
        geom = SensorGeometry(width=patch_height.shape[1], height=patch_height.shape[0])
    valid = patch_height.valid_mask & mask.raster

    n_field = geom.rest_sphere_normals().n.copy()
    if valid.any():
        if normals is not None:
            n_contact = normals.n
        else:
            gy, gx = np.gradient(patch_height.h, patch_height.pixel_pitch)
            norm = np.sqrt(gx**2 + gy**2 + 1.0)
            n_contact = np.stack([-gx / norm, -gy / norm, 1.0 / norm], axis=-1)
        n_field[valid] = n_contact[valid]

    img = _shade_field(n_field, geom, coating, lights)
    img = img * 255.0
    if noise_sigma > 0.0:
        if rng is None:
            rng = np.random.default_rng(0)
        img = img + rng.normal(0.0, noise_sigma * 255.0, size=img.shape)
    px = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    return TactileFrame(
        pixels=px, timestamp_us=timestamp_us, frame_id=frame_id, exposure_ms=exposure_ms
    )


def render_background(
    coating: CoatingModel,
    lights: Illumination = DEFAULT_LIGHTS,
    geom: SensorGeometry | None = None,
) -> TactileFrame:
    """The no-contact frame: the rest sphere under the rig, noise-free."""
    if geom is None:
        geom = SensorGeometry()
    shape = (geom.height, geom.width)
    empty = HeightMap(
        h=np.zeros(shape), pixel_pitch=geom.pixel_pitch, valid_mask=np.zeros(shape, bool)
    )
    no_contact = ContactMask(center=geom.optical_center, radius=0.0, shape=shape)
    return render(empty, no_contact, coating, lights, noise_sigma=0.0, geom=geom)


def hex_pyramid_reference(
    geom: SensorGeometry,
    base_width_mm: float = 7.0,
    apex_height_mm: float = 1.2,
    center_mm: tuple[float, float] = (0.0, 0.0),
) -> NormalMap:
    """Analytic normal map of the hexagonal pyramid at sensor resolution.

    The apex pixel resolves to (0, 0, 1) by symmetry tie-break; outside the
    hexagon the normals are flat and flagged invalid.
    """
    from .scene import HexPyramid

    hexp = HexPyramid(center=center_mm, base_width_mm=base_width_mm, apex_height_mm=apex_height_mm)
    yy, xx = np.mgrid[0 : geom.height, 0 : geom.width]
    sx, sy = geom.pixel_to_mm(xx, yy)
    _, gx, gy = hexp.height_and_gradient(sx, sy)
    d, _ = hexp.hex_distance(sx, sy)
    inside = d < hexp.apothem
    norm = np.sqrt(gx**2 + gy**2 + 1.0)
    n = np.stack([-gx / norm, -gy / norm, 1.0 / norm], axis=-1)
    n[~inside] = (0.0, 0.0, 1.0)
    return NormalMap(n=n, valid_mask=inside)
