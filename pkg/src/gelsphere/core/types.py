"""Core data types shared by the whole stack: frames, per-pixel geometry
fields, contact masks, planar poses, and sensor geometry.

All pixel rasters are row-major numpy arrays indexed [row, col] = [y, x].
Camera-frame convention for normals: z toward the camera, x right, y down.
Heights are millimetres, positive = indentation depth into the gel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Stream size used by the physical sensor; other sizes are allowed but flagged.
CONFORMANT_FRAME_SIZE = 240
DEFAULT_EXPOSURE_MS = 100

# Default imaged-patch side length.  The sensor never reports mm/pixel, so
# this is configuration with a stated default, recorded in every file header.
DEFAULT_WINDOW_MM = 30.0
DEFAULT_GEL_RADIUS_MM = 65.3 / 2.0


class GelsphereError(Exception):
    """Base class for typed errors raised by this package."""


class EmptyMask(GelsphereError):
    pass


class NonFiniteGradient(GelsphereError):
    pass


@dataclass(frozen=True)
class TactileFrame:
    """One timestamped RGB sensor image plus capture metadata.

    pixels: uint8 array of shape (height, width, 3).
    """

    pixels: np.ndarray
    timestamp_us: int
    frame_id: int
    exposure_ms: int = DEFAULT_EXPOSURE_MS

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.uint8)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"pixels must be (H, W, 3) uint8, got {px.shape}")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def is_conformant_size(self) -> bool:
        return self.width == self.height == CONFORMANT_FRAME_SIZE


@dataclass(frozen=True)
class GradientField:
    """Per-pixel surface slope (dh/dx, dh/dy), dimensionless mm/mm."""

    gx: np.ndarray
    gy: np.ndarray
    valid_mask: np.ndarray

    def __post_init__(self):
        gx = np.asarray(self.gx, dtype=np.float64)
        gy = np.asarray(self.gy, dtype=np.float64)
        vm = np.asarray(self.valid_mask, dtype=bool)
        if not (gx.shape == gy.shape == vm.shape):
            raise ValueError("gx, gy, valid_mask shapes differ")
        if vm.any() and not (
            np.isfinite(gx[vm]).all() and np.isfinite(gy[vm]).all()
        ):
            raise NonFiniteGradient("non-finite gradient on valid pixels")
        object.__setattr__(self, "gx", gx)
        object.__setattr__(self, "gy", gy)
        object.__setattr__(self, "valid_mask", vm)

    @property
    def shape(self) -> tuple[int, int]:
        return self.gx.shape


@dataclass(frozen=True)
class NormalMap:
    """Per-pixel unit surface normals, shape (H, W, 3); nz > 0 on valid pixels."""

    n: np.ndarray
    valid_mask: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.n, dtype=np.float64)
        vm = np.asarray(self.valid_mask, dtype=bool)
        if n.ndim != 3 or n.shape[2] != 3 or n.shape[:2] != vm.shape:
            raise ValueError("n must be (H, W, 3) matching valid_mask")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "valid_mask", vm)

    @property
    def shape(self) -> tuple[int, int]:
        return self.valid_mask.shape

    @property
    def nx(self) -> np.ndarray:
        return self.n[..., 0]

    @property
    def ny(self) -> np.ndarray:
        return self.n[..., 1]

    @property
    def nz(self) -> np.ndarray:
        return self.n[..., 2]

    def check_invariants(self, tol: float = 1e-6) -> None:
        vm = self.valid_mask
        if vm.any():
            norms = np.linalg.norm(self.n[vm], axis=-1)
            if not np.allclose(norms, 1.0, atol=tol):
                raise ValueError("normals not unit length on valid pixels")
            if not (self.n[vm][:, 2] > 0).all():
                raise ValueError("nz <= 0 on valid pixels")


def flat_normal_map(shape: tuple[int, int], valid: np.ndarray | None = None) -> NormalMap:
    """All-(0,0,1) normal map; valid everywhere unless a mask is given."""
    n = np.zeros(shape + (3,), dtype=np.float64)
    n[..., 2] = 1.0
    vm = np.ones(shape, dtype=bool) if valid is None else np.asarray(valid, bool)
    return NormalMap(n=n, valid_mask=vm)


@dataclass(frozen=True)
class HeightMap:
    """Per-pixel height in mm (positive = indentation depth into the gel)."""

    h: np.ndarray
    pixel_pitch: float
    valid_mask: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.float64)
        vm = np.asarray(self.valid_mask, dtype=bool)
        if h.shape != vm.shape:
            raise ValueError("h and valid_mask shapes differ")
        if self.pixel_pitch <= 0:
            raise ValueError("pixel_pitch must be > 0")
        if vm.any() and not np.isfinite(h[vm]).all():
            raise ValueError("non-finite height on valid pixels")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "valid_mask", vm)

    @property
    def shape(self) -> tuple[int, int]:
        return self.h.shape


@dataclass(frozen=True)
class ContactMask:
    """Circular contact region: center (cx, cy) in pixels, radius in pixels.

    The raster is True exactly for pixels whose center lies within `radius`
    of `center`.  radius == 0 encodes "no contact".
    """

    center: tuple[float, float]
    radius: float
    shape: tuple[int, int]
    raster: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be >= 0")
        h, w = self.shape
        diag = math.hypot(h, w)
        if self.radius > diag:
            raise ValueError("radius exceeds image diagonal")
        if self.raster is None:
            object.__setattr__(self, "raster", self._rasterize())
        else:
            r = np.asarray(self.raster, dtype=bool)
            if r.shape != self.shape:
                raise ValueError("raster shape mismatch")
            object.__setattr__(self, "raster", r)

    def _rasterize(self) -> np.ndarray:
        h, w = self.shape
        if self.radius == 0:
            return np.zeros((h, w), dtype=bool)
        yy, xx = np.mgrid[0:h, 0:w]
        cx, cy = self.center
        return (xx - cx) ** 2 + (yy - cy) ** 2 <= self.radius**2

    @property
    def empty(self) -> bool:
        return self.radius == 0 or not self.raster.any()


def wrap_angle(theta: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    t = math.fmod(theta, 2.0 * math.pi)
    if t <= -math.pi:
        t += 2.0 * math.pi
    elif t > math.pi:
        t -= 2.0 * math.pi
    return t


@dataclass(frozen=True)
class PlanarPose:
    """SE(2) pose of the sensor contact patch on the scan plane.

    x, y in mm (world frame), theta in radians, normalized to (-pi, pi].
    """

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])

    @staticmethod
    def identity() -> "PlanarPose":
        return PlanarPose(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class SensorGeometry:
    """Physical parameters tying pixels to millimetres.

    gel_radius: radius of the sensing gel sphere (mm).
    window_mm: physical side length of the imaged patch (mm).
    width/height: frame size in pixels.
    optical_center: pixel coordinates (cx, cy) of the sphere's contact apex.
    """

    gel_radius: float = DEFAULT_GEL_RADIUS_MM
    window_mm: float = DEFAULT_WINDOW_MM
    width: int = CONFORMANT_FRAME_SIZE
    height: int = CONFORMANT_FRAME_SIZE
    optical_center: tuple[float, float] | None = None

    def __post_init__(self):
        if self.gel_radius <= 0:
            raise ValueError("gel_radius must be > 0")
        if self.window_mm <= 0 or self.width <= 0 or self.height <= 0:
            raise ValueError("window and frame size must be positive")
        if self.optical_center is None:
            object.__setattr__(
                self,
                "optical_center",
                ((self.width - 1) / 2.0, (self.height - 1) / 2.0),
            )
        cx, cy = self.optical_center
        if not (0 <= cx < self.width and 0 <= cy < self.height):
            raise ValueError("optical_center outside the image")

    @property
    def pixel_pitch(self) -> float:
        return self.window_mm / self.width

    def pixel_to_mm(self, px: np.ndarray, py: np.ndarray):
        """Pixel indices -> sensor-frame mm offsets from the optical center."""
        cx, cy = self.optical_center
        p = self.pixel_pitch
        return (np.asarray(px) - cx) * p, (np.asarray(py) - cy) * p

    def mm_to_pixel(self, sx: np.ndarray, sy: np.ndarray):
        cx, cy = self.optical_center
        p = self.pixel_pitch
        return np.asarray(sx) / p + cx, np.asarray(sy) / p + cy

    def sphere_sag(self, rho_mm: np.ndarray) -> np.ndarray:
        """Height of the rest gel sphere above the apex plane at lateral
        distance rho from the apex (mm)."""
        rho = np.asarray(rho_mm, dtype=np.float64)
        r = np.minimum(rho, self.gel_radius)
        return self.gel_radius - np.sqrt(self.gel_radius**2 - r**2)

    def rest_sphere_normals(self) -> NormalMap:
        """Camera-facing normals of the undeformed gel sphere per pixel."""
        yy, xx = np.mgrid[0 : self.height, 0 : self.width]
        sx, sy = self.pixel_to_mm(xx, yy)
        rho2 = sx**2 + sy**2
        R = self.gel_radius
        rho2 = np.minimum(rho2, (0.999 * R) ** 2)
        nz = np.sqrt(R**2 - rho2) / R
        n = np.stack([-sx / R, -sy / R, nz], axis=-1)
        n /= np.linalg.norm(n, axis=-1, keepdims=True)
        return NormalMap(n=n, valid_mask=np.ones((self.height, self.width), bool))
