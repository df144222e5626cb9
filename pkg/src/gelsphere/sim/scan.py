"""Trajectory playback: roll the virtual sensor and emit frames + ground truth."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ..core.types import (
    ContactMask,
    HeightMap,
    NormalMap,
    PlanarPose,
    SensorGeometry,
    TactileFrame,
)
from .contact import contact_patch
from .render import (
    DEFAULT_LIGHTS,
    DEFAULT_NOISE_SIGMA,
    CoatingModel,
    Illumination,
    render,
    render_background,
)
from .scene import Scene

MAX_STEP_MM = 1.0
MAX_STEP_DEG = 2.0
DEFAULT_FPS = 10.0
DEFAULT_FORCE_N = 10.0


@dataclass(frozen=True)
class Trajectory:
    """Timestamped pose sequence with an optional normal-force profile."""

    timestamps_us: np.ndarray
    poses: list[PlanarPose]
    forces_n: np.ndarray = None

    def __post_init__(self):
        ts = np.asarray(self.timestamps_us, np.int64)
        if len(ts) != len(self.poses):
            raise ValueError("timestamps and poses length mismatch")
        if len(ts) > 1 and not (np.diff(ts) > 0).all():
            raise ValueError("timestamps must strictly increase")
        f = self.forces_n
        if f is None:
            f = np.full(len(ts), DEFAULT_FORCE_N)
        f = np.asarray(f, np.float64)
        if len(f) != len(ts):
            raise ValueError("force profile length mismatch")
        for a, b in zip(self.poses, self.poses[1:]):
            if math.hypot(b.x - a.x, b.y - a.y) > MAX_STEP_MM + 1e-9:
                raise ValueError("pose step exceeds max translation (frames must overlap)")
            dth = abs((b.theta - a.theta + math.pi) % (2 * math.pi) - math.pi)
            if dth > math.radians(MAX_STEP_DEG) + 1e-9:
                raise ValueError("pose step exceeds max rotation")
        object.__setattr__(self, "timestamps_us", ts)
        object.__setattr__(self, "forces_n", f)

    def __len__(self):
        return len(self.poses)


def _timestamps(n: int, fps: float = DEFAULT_FPS) -> np.ndarray:
    return (np.arange(n) * (1e6 / fps)).astype(np.int64)


def straight_roll(
    length_mm: float,
    step_mm: float = 1.0,
    start: PlanarPose = PlanarPose(0.0, 0.0, 0.0),
    heading_deg: float = 0.0,
    force_n: float = DEFAULT_FORCE_N,
    fps: float = DEFAULT_FPS,
) -> Trajectory:
    n = int(round(length_mm / step_mm)) + 1
    hd = math.radians(heading_deg)
    poses = [
        PlanarPose(
            start.x + i * step_mm * math.cos(hd),
            start.y + i * step_mm * math.sin(hd),
            start.theta,
        )
        for i in range(n)
    ]
    return Trajectory(_timestamps(n, fps), poses, np.full(n, force_n))


def square_path(
    side_mm: float = 30.0,
    step_mm: float = 1.0,
    start: PlanarPose = PlanarPose(0.0, 0.0, 0.0),
    force_n: float = DEFAULT_FORCE_N,
    fps: float = DEFAULT_FPS,
) -> Trajectory:
    """Closed square loop returning to the start pose."""
    per_side = int(round(side_mm / step_mm))
    poses = [start]
    headings = [0.0, 90.0, 180.0, 270.0]
    for h in headings:
        hd = math.radians(h)
        for _ in range(per_side):
            p = poses[-1]
            poses.append(PlanarPose(p.x + step_mm * math.cos(hd), p.y + step_mm * math.sin(hd), p.theta))
    n = len(poses)
    return Trajectory(_timestamps(n, fps), poses, np.full(n, force_n))


def serpentine_path(
    x_span_mm: float,
    y_span_mm: float,
    row_pitch_mm: float = 8.0,
    step_mm: float = 1.0,
    origin: tuple[float, float] = (0.0, 0.0),
    force_n: float = DEFAULT_FORCE_N,
    fps: float = DEFAULT_FPS,
) -> Trajectory:
    """Boustrophedon coverage of a rectangle centered on origin."""
    x0 = origin[0] - x_span_mm / 2.0
    y0 = origin[1] - y_span_mm / 2.0
    rows = max(int(round(y_span_mm / row_pitch_mm)) + 1, 2)
    poses = []
    for r in range(rows):
        y = y0 + min(r * row_pitch_mm, y_span_mm)
        xs = np.arange(0.0, x_span_mm + 1e-9, step_mm)
        if r % 2 == 1:
            xs = xs[::-1]
        for x in xs:
            poses.append(PlanarPose(x0 + x, y, 0.0))
        if r < rows - 1:
            y_next = y0 + min((r + 1) * row_pitch_mm, y_span_mm)
            ny = int(math.ceil((y_next - y) / step_mm))
            xe = poses[-1].x
            for i in range(1, ny):
                poses.append(PlanarPose(xe, y + i * (y_next - y) / ny, 0.0))
    n = len(poses)
    return Trajectory(_timestamps(n, fps), poses, np.full(n, force_n))


def load_trajectory(path) -> Trajectory:
    """CSV columns: timestamp_us, x_mm, y_mm, theta_deg, force_n."""
    ts, poses, forces = [], [], []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            ts.append(int(row["timestamp_us"]))
            poses.append(
                PlanarPose(float(row["x_mm"]), float(row["y_mm"]), math.radians(float(row["theta_deg"])))
            )
            forces.append(float(row.get("force_n", DEFAULT_FORCE_N)))
    return Trajectory(np.array(ts, np.int64), poses, np.array(forces))


def save_trajectory(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["timestamp_us", "x_mm", "y_mm", "theta_deg", "force_n"])
        for t, p, fn in zip(traj.timestamps_us, traj.poses, traj.forces_n):
            w.writerow([int(t), f"{p.x:.6f}", f"{p.y:.6f}", f"{math.degrees(p.theta):.6f}", f"{fn:.4f}"])


@dataclass
class ScanGroundTruth:
    """Per-frame truth exported alongside a simulated stream."""

    poses: list[PlanarPose]
    contact_masks: list[ContactMask]
    normal_maps: list[NormalMap]
    height_maps: list[HeightMap]
    forces_n: np.ndarray
    landmarks_world: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    def save(self, path) -> None:
        np.savez_compressed(
            path,
            poses=np.array([p.as_array() for p in self.poses]),
            forces=self.forces_n,
            centers=np.array([m.center for m in self.contact_masks]),
            radii=np.array([m.radius for m in self.contact_masks]),
            normals=np.stack([nm.n for nm in self.normal_maps]).astype(np.float32),
            valid=np.stack([nm.valid_mask for nm in self.normal_maps]),
            heights=np.stack([hm.h for hm in self.height_maps]).astype(np.float32),
            pixel_pitch=self.height_maps[0].pixel_pitch if self.height_maps else 0.125,
            landmarks=self.landmarks_world,
        )

    @staticmethod
    def load(path) -> "ScanGroundTruth":
        z = np.load(path)
        shape = z["valid"].shape[1:]
        poses = [PlanarPose(*row) for row in z["poses"]]
        masks = [
            ContactMask(center=tuple(c), radius=float(r), shape=shape)
            for c, r in zip(z["centers"], z["radii"])
        ]
        normals = [
            NormalMap(n=n.astype(np.float64), valid_mask=v)
            for n, v in zip(z["normals"], z["valid"])
        ]
        pitch = float(z["pixel_pitch"])
        heights = [
            HeightMap(h=h.astype(np.float64), pixel_pitch=pitch, valid_mask=v)
            for h, v in zip(z["heights"], z["valid"])
        ]
        return ScanGroundTruth(
            poses=poses,
            contact_masks=masks,
            normal_maps=normals,
            height_maps=heights,
            forces_n=z["forces"],
            landmarks_world=z["landmarks"],
        )


@dataclass
class ScanResult:
    frames: list[TactileFrame]
    background: TactileFrame
    ground_truth: ScanGroundTruth


def simulate_scan(
    scene: Scene,
    trajectory: Trajectory,
    coating: CoatingModel,
    geom: SensorGeometry | None = None,
    seed: int = 0,
    lights: Illumination = DEFAULT_LIGHTS,
    noise_sigma: float = DEFAULT_NOISE_SIGMA,
) -> ScanResult:
    """Deterministic frame stream + ground truth for a trajectory.

    Identical (scene, trajectory, coating, seed) give bit-identical streams.
    """
    if geom is None:
        geom = SensorGeometry()
    rng = np.random.default_rng(seed)
    background = render_background(coating, lights, geom)

    frames: list[TactileFrame] = []
    masks, normal_maps, height_maps = [], [], []
    for i, (t_us, pose, force) in enumerate(
        zip(trajectory.timestamps_us, trajectory.poses, trajectory.forces_n)
    ):
        hm, mask, nm = contact_patch(scene, pose, float(force), geom)
        frame = render(
            hm,
            mask,
            coating,
            lights,
            noise_sigma=noise_sigma,
            geom=geom,
            normals=nm,
            rng=rng,
            frame_id=i,
            timestamp_us=int(t_us),
        )
        frames.append(frame)
        masks.append(mask)
        normal_maps.append(nm)
        height_maps.append(hm)

    gt = ScanGroundTruth(
        poses=list(trajectory.poses),
        contact_masks=masks,
        normal_maps=normal_maps,
        height_maps=height_maps,
        forces_n=np.asarray(trajectory.forces_n, np.float64),
        landmarks_world=scene.landmarks(),
    )
    return ScanResult(frames=frames, background=background, ground_truth=gt)
