"""Procedural scan scenes: a flat plate carrying analytic relief primitives.

Primitives expose exact heights AND exact gradients so the simulator can
export ground-truth normal maps that are trustworthy to float precision.
Relief combines primitives by max (they are non-negative bumps on a plate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml


class OutOfBounds(Exception):
    pass


@dataclass(frozen=True)
class SphereIndenter:
    """Spherical cap poking height_mm above the plate."""

    center: tuple[float, float]
    radius_mm: float
    height_mm: float

    def __post_init__(self):
        if not (0 < self.height_mm <= self.radius_mm):
            raise ValueError("need 0 < height_mm <= radius_mm")

    def height_and_gradient(self, x, y):
        dx = x - self.center[0]
        dy = y - self.center[1]
        rho2 = dx**2 + dy**2
        R = self.radius_mm
        lim2 = 2 * R * self.height_mm - self.height_mm**2
        inside = rho2 < lim2
        root = np.sqrt(np.maximum(R**2 - rho2, 1e-18))
        h = np.where(inside, root - (R - self.height_mm), 0.0)
        gx = np.where(inside, -dx / root, 0.0)
        gy = np.where(inside, -dy / root, 0.0)
        return h, gx, gy

    def bbox(self):
        r = math.sqrt(max(2 * self.radius_mm * self.height_mm - self.height_mm**2, 0))
        cx, cy = self.center
        return (cx - r, cy - r, cx + r, cy + r)


_HEX_DIRS = [
    (math.cos(math.radians(60 * i)), math.sin(math.radians(60 * i))) for i in range(6)
]


@dataclass(frozen=True)
class HexPyramid:
    """Hexagonal pyramid: six planar facets, apex at center.

    base_width_mm is across flats (2 * apothem).
    """

    center: tuple[float, float]
    base_width_mm: float
    apex_height_mm: float

    @property
    def apothem(self) -> float:
        return self.base_width_mm / 2.0

    def hex_distance(self, x, y):
        """Support distance; the hexagon boundary is the level set == apothem."""
        dx = x - self.center[0]
        dy = y - self.center[1]
        d = np.full(np.shape(dx), -np.inf)
        idx = np.zeros(np.shape(dx), dtype=np.int8)
        for i, (ux, uy) in enumerate(_HEX_DIRS):
            di = ux * dx + uy * dy
            take = di > d
            d = np.where(take, di, d)
            idx = np.where(take, i, idx)
        return d, idx

    def height_and_gradient(self, x, y):
        d, idx = self.hex_distance(x, y)
        a = self.apothem
        inside = d < a
        slope = self.apex_height_mm / a
        h = np.where(inside, self.apex_height_mm - slope * np.maximum(d, 0.0), 0.0)
        ux = np.choose(idx, [u[0] for u in _HEX_DIRS])
        uy = np.choose(idx, [u[1] for u in _HEX_DIRS])
        on_facet = inside & (d > 0)
        gx = np.where(on_facet, -slope * ux, 0.0)
        gy = np.where(on_facet, -slope * uy, 0.0)
        return h, gx, gy

    def facet_normals(self) -> np.ndarray:
        """Unit normals of the six facets (outward azimuth order)."""
        slope = self.apex_height_mm / self.apothem
        out = []
        for ux, uy in _HEX_DIRS:
            v = np.array([slope * ux, slope * uy, 1.0])
            out.append(v / np.linalg.norm(v))
        return np.array(out)

    def bbox(self):
        cx, cy = self.center
        r = self.apothem / math.cos(math.radians(30))  # circumradius
        return (cx - r, cy - r, cx + r, cy + r)


def _segment_distance(px, py, ax, ay, bx, by):
    """Distance from points to segment AB plus the unit direction away from
    the closest segment point (the gradient of the distance)."""
    abx, aby = bx - ax, by - ay
    ab2 = abx**2 + aby**2
    t = ((px - ax) * abx + (py - ay) * aby) / max(ab2, 1e-18)
    t = np.clip(t, 0.0, 1.0)
    qx = ax + t * abx
    qy = ay + t * aby
    dx = px - qx
    dy = py - qy
    dist = np.hypot(dx, dy)
    safe = np.maximum(dist, 1e-12)
    return dist, dx / safe, dy / safe


@dataclass(frozen=True)
class Ridge:
    """A smooth ridge along a segment: cos^2 cross-profile, C1 everywhere."""

    a: tuple[float, float]
    b: tuple[float, float]
    height_mm: float
    half_width_mm: float

    def height_and_gradient(self, x, y):
        dist, dgx, dgy = _segment_distance(x, y, self.a[0], self.a[1], self.b[0], self.b[1])
        w = self.half_width_mm
        inside = dist < w
        arg = np.pi * dist / (2.0 * w)
        h = np.where(inside, self.height_mm * np.cos(arg) ** 2, 0.0)
        dh = np.where(
            inside, -self.height_mm * (np.pi / (2.0 * w)) * np.sin(2.0 * arg), 0.0
        )
        return h, dh * dgx, dh * dgy

    def bbox(self):
        w = self.half_width_mm
        return (
            min(self.a[0], self.b[0]) - w,
            min(self.a[1], self.b[1]) - w,
            max(self.a[0], self.b[0]) + w,
            max(self.a[1], self.b[1]) + w,
        )


def feather_ridges(
    origin: tuple[float, float] = (-37.5, -16.25),
    length_mm: float = 75.0,
    width_mm: float = 32.5,
    ridge_height_mm: float = 0.4,
    barb_spacing_mm: float = 1.5,
    barb_angle_deg: float = 50.0,
    ridge_half_width_mm: float = 0.45,
) -> list[Ridge]:
    """Deterministic procedural feather: central shaft plus angled barbs."""
    x0, y0 = origin
    yc = y0 + width_mm / 2.0
    ridges = [
        Ridge(
            a=(x0 + 1.0, yc),
            b=(x0 + length_mm - 1.0, yc),
            height_mm=ridge_height_mm,
            half_width_mm=ridge_half_width_mm * 1.4,
        )
    ]
    n_barbs = int((length_mm - 6.0) / barb_spacing_mm)
    for i in range(n_barbs):
        bx = x0 + 3.0 + i * barb_spacing_mm
        # deterministic vane irregularity: real barbs vary in sweep and
        # length, and the variation is what makes locations distinguishable
        wob = math.sin(2.17 * i) + 0.5 * math.sin(5.91 * i + 1.3)
        angle = math.radians(barb_angle_deg + 6.0 * wob)
        length_frac = 0.80 + 0.18 * math.sin(3.77 * i + 0.7)
        dirs = [
            (math.cos(angle), math.sin(angle)),
            (math.cos(angle), -math.sin(angle)),
        ]
        for side, (ux, uy) in enumerate(dirs):
            room_y = (width_mm / 2.0 - 1.0) / abs(uy)
            room_x = (x0 + length_mm - 1.0 - bx) / ux
            t = max(min(room_y, room_x) * (length_frac if side == 0 else 0.98 * length_frac), 0.0)
            if t < 1.0:
                continue
            ridges.append(
                Ridge(
                    a=(bx, yc),
                    b=(bx + t * ux, yc + t * uy),
                    height_mm=ridge_height_mm * (1.0 + 0.12 * math.sin(4.3 * i + side)),
                    half_width_mm=ridge_half_width_mm,
                )
            )
    return ridges


@dataclass
class Scene:
    """Rectangular plate (centered on the origin) carrying relief primitives."""

    plate_mm: tuple[float, float] = (80.0, 50.0)
    primitives: list = field(default_factory=list)
    name: str = "scene"

    def __post_init__(self):
        if self.plate_mm[0] <= 0 or self.plate_mm[1] <= 0:
            raise ValueError("plate extents must be positive")

    def contains(self, x: float, y: float) -> bool:
        return abs(x) <= self.plate_mm[0] / 2.0 and abs(y) <= self.plate_mm[1] / 2.0

    def _active(self, xmin, ymin, xmax, ymax):
        out = []
        for p in self.primitives:
            bx0, by0, bx1, by1 = p.bbox()
            if bx1 < xmin or bx0 > xmax or by1 < ymin or by0 > ymax:
                continue
            out.append(p)
        return out

    def relief_and_gradient(self, x: np.ndarray, y: np.ndarray):
        """Exact height and gradient of the relief at world coords (mm).

        Primitives combine by max; the gradient follows the tallest one.
        """
        x = np.asarray(x, np.float64)
        y = np.asarray(y, np.float64)
        h = np.zeros_like(x)
        gx = np.zeros_like(x)
        gy = np.zeros_like(x)
        active = self._active(x.min(), y.min(), x.max(), y.max())
        for p in active:
            ph, pgx, pgy = p.height_and_gradient(x, y)
            take = ph > h
            h = np.where(take, ph, h)
            gx = np.where(take, pgx, gx)
            gy = np.where(take, pgy, gy)
        return h, gx, gy

    def relief(self, x, y):
        return self.relief_and_gradient(x, y)[0]

    def landmarks(self, count: int = 24, margin_mm: float = 2.0) -> np.ndarray:
        """Well-defined texture points (ridge junctions), evenly thinned.

        Deterministic; used for drift evaluation correspondences.
        """
        pts = []
        for p in self.primitives:
            if isinstance(p, Ridge):
                pts.append(p.a)
            elif isinstance(p, (SphereIndenter, HexPyramid)):
                pts.append(p.center)
        raw = [
            (x, y)
            for x, y in pts
            if abs(x) <= self.plate_mm[0] / 2 - margin_mm
            and abs(y) <= self.plate_mm[1] / 2 - margin_mm
        ]
        # unique barb roots (shaft junctions repeat per barb pair)
        uniq = sorted(set(raw))
        if len(uniq) <= count:
            return np.array(uniq, np.float64)
        step = len(uniq) / count
        picked = [uniq[int(i * step)] for i in range(count)]
        return np.array(picked, np.float64)


def flat_scene(plate_mm=(80.0, 50.0)) -> Scene:
    return Scene(plate_mm=plate_mm, primitives=[], name="flat")


def sphere_scene(radius_mm: float, height_mm: float, center=(0.0, 0.0), plate_mm=(80.0, 50.0)) -> Scene:
    return Scene(
        plate_mm=plate_mm,
        primitives=[SphereIndenter(center=center, radius_mm=radius_mm, height_mm=height_mm)],
        name=f"sphere_r{radius_mm}",
    )


def hex_scene(base_width_mm=7.0, apex_height_mm=1.2, center=(0.0, 0.0), plate_mm=(80.0, 50.0)) -> Scene:
    return Scene(
        plate_mm=plate_mm,
        primitives=[
            HexPyramid(center=center, base_width_mm=base_width_mm, apex_height_mm=apex_height_mm)
        ],
        name="hex",
    )


def feather_scene(plate_mm=(85.0, 42.0), **kwargs) -> Scene:
    return Scene(plate_mm=plate_mm, primitives=feather_ridges(**kwargs), name="feather")


_PRIMITIVE_BUILDERS = {
    "sphere_indenter": lambda d: SphereIndenter(
        center=tuple(d.get("center_mm", (0.0, 0.0))),
        radius_mm=float(d["radius_mm"]),
        height_mm=float(d.get("height_mm", min(2.0, float(d["radius_mm"])))),
    ),
    "hex_pyramid": lambda d: HexPyramid(
        center=tuple(d.get("center_mm", (0.0, 0.0))),
        base_width_mm=float(d.get("base_width_mm", 7.0)),
        apex_height_mm=float(d.get("apex_height_mm", 1.2)),
    ),
    "ridge": lambda d: Ridge(
        a=tuple(d["a_mm"]),
        b=tuple(d["b_mm"]),
        height_mm=float(d.get("height_mm", 0.4)),
        half_width_mm=float(d.get("half_width_mm", 0.45)),
    ),
    "flat": lambda d: None,
}


def load_scene(path) -> Scene:
    """Scene description file: YAML key-values with explicit mm units."""
    with open(path) as f:
        doc = yaml.safe_load(f)
    plate = tuple(doc.get("plate_mm", (80.0, 50.0)))
    prims = []
    for entry in doc.get("primitives", []):
        kind = entry["kind"]
        if kind == "feather_plate":
            prims.extend(
                feather_ridges(
                    origin=tuple(entry.get("origin_mm", (-37.5, -16.25))),
                    length_mm=float(entry.get("length_mm", 75.0)),
                    width_mm=float(entry.get("width_mm", 32.5)),
                    ridge_height_mm=float(entry.get("ridge_height_mm", 0.4)),
                    barb_spacing_mm=float(entry.get("barb_spacing_mm", 1.5)),
                )
            )
            continue
        if kind not in _PRIMITIVE_BUILDERS:
            raise ValueError(f"unknown primitive kind: {kind}")
        p = _PRIMITIVE_BUILDERS[kind](entry)
        if p is not None:
            prims.append(p)
    return Scene(plate_mm=plate, primitives=prims, name=str(doc.get("name", "scene")))


def save_scene(scene: Scene, path) -> None:
    doc = {"name": scene.name, "plate_mm": list(scene.plate_mm), "primitives": []}
    for p in scene.primitives:
        if isinstance(p, SphereIndenter):
            doc["primitives"].append(
                {
                    "kind": "sphere_indenter",
                    "center_mm": list(p.center),
                    "radius_mm": p.radius_mm,
                    "height_mm": p.height_mm,
                }
            )
        elif isinstance(p, HexPyramid):
            doc["primitives"].append(
                {
                    "kind": "hex_pyramid",
                    "center_mm": list(p.center),
                    "base_width_mm": p.base_width_mm,
                    "apex_height_mm": p.apex_height_mm,
                }
            )
        elif isinstance(p, Ridge):
            doc["primitives"].append(
                {
                    "kind": "ridge",
                    "a_mm": list(p.a),
                    "b_mm": list(p.b),
                    "height_mm": p.height_mm,
                    "half_width_mm": p.half_width_mm,
                }
            )
    with open(path, "w") as f:
        yaml.safe_dump(doc, f, sort_keys=False)
