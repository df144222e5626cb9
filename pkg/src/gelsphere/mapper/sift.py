"""Scale-invariant keypoints + descriptors on scalar fields, from scratch.

Operates on curvature maps (illumination-invariant registration signal):
difference-of-Gaussian extrema over a small scale space, orientation from
gradient histograms, 4x4x8 descriptor, Lowe ratio matching, and a rigid
SE(2) consensus fit.  No external vision dependencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

RATIO_TEST = 0.75
INLIER_RADIUS_PX = 2.0
MIN_INLIERS = 12
N_OCTAVES = 2
N_SCALES = 3  # DoG layers examined per octave
BASE_SIGMA = 1.6
CONTRAST_THRESHOLD = 0.015  # curvature fields are smooth; favor recall
EDGE_RATIO = 10.0


@dataclass(frozen=True)
class Keypoint:
    x: float
    y: float
    sigma: float
    orientation: float
    response: float


def _normalize_field(field: np.ndarray, valid: np.ndarray) -> np.ndarray:
    out = np.zeros_like(field, np.float64)
    if valid.any():
        vals = field[valid]
        scale = np.percentile(np.abs(vals), 95)
        if scale > 1e-12:
            out[valid] = np.clip(field[valid] / scale, -3.0, 3.0)
    return out


def detect_keypoints(field: np.ndarray, valid: np.ndarray) -> list[Keypoint]:
    """DoG extrema with contrast + edge-response filtering."""
    img = _normalize_field(field, valid)
    h, w = img.shape
    kps: list[Keypoint] = []
    k = 2.0 ** (1.0 / N_SCALES)
    for octave in range(N_OCTAVES):
        step = 2**octave
        base = img[::step, ::step]
        vmask = valid[::step, ::step]
        sigmas = [BASE_SIGMA * k**i for i in range(N_SCALES + 3)]
        gauss = [gaussian_filter(base, s, mode="nearest") for s in sigmas]
        dogs = [g2 - g1 for g1, g2 in zip(gauss, gauss[1:])]
        for si in range(1, len(dogs) - 1):
            d0, d1, d2 = dogs[si - 1], dogs[si], dogs[si + 1]
            ah, aw = d1.shape
            c = d1[1:-1, 1:-1]
            strong = np.abs(c) > CONTRAST_THRESHOLD
            if not strong.any():
                continue
            neigh_max = c.copy()
            neigh_min = c.copy()
            for arr in (d0, d1, d2):
                for dy in (0, 1, 2):
                    for dx in (0, 1, 2):
                        s = arr[dy : dy + ah - 2, dx : dx + aw - 2]
                        neigh_max = np.maximum(neigh_max, s)
                        neigh_min = np.minimum(neigh_min, s)
            is_max = (c >= neigh_max) & strong & (c > 0)
            is_min = (c <= neigh_min) & strong & (c < 0)
            ys, xs = np.nonzero(is_max | is_min)
            for y, x in zip(ys + 1, xs + 1):
                # Hessian edge filter
                dxx = d1[y, x + 1] + d1[y, x - 1] - 2 * d1[y, x]
                dyy = d1[y + 1, x] + d1[y - 1, x] - 2 * d1[y, x]
                dxy = 0.25 * (
                    d1[y + 1, x + 1] - d1[y + 1, x - 1] - d1[y - 1, x + 1] + d1[y - 1, x - 1]
                )
                tr = dxx + dyy
                det = dxx * dyy - dxy * dxy
                if det <= 0 or tr * tr / det >= (EDGE_RATIO + 1) ** 2 / EDGE_RATIO:
                    continue
                if not vmask[y, x]:
                    continue
                sigma = sigmas[si] * step
                gx = 0.5 * (gauss[si][y, x + 1] - gauss[si][y, x - 1])
                gy = 0.5 * (gauss[si][y + 1, x] - gauss[si][y - 1, x])
                kps.append(
                    Keypoint(
                        x=float(x * step),
                        y=float(y * step),
                        sigma=float(sigma),
                        orientation=0.0,
                        response=float(abs(d1[y, x])),
                    )
                )
    return _assign_orientations(img, kps)


def _assign_orientations(img: np.ndarray, kps: list[Keypoint]) -> list[Keypoint]:
    gy, gx = np.gradient(img)
    mag = np.hypot(gx, gy)
    ang = np.arctan2(gy, gx)
    h, w = img.shape
    out = []
    for kp in kps:
        r = max(int(round(3.0 * kp.sigma)), 3)
        x0, y0 = int(round(kp.x)), int(round(kp.y))
        xs = slice(max(x0 - r, 0), min(x0 + r + 1, w))
        ys = slice(max(y0 - r, 0), min(y0 + r + 1, h))
        m = mag[ys, xs]
        a = ang[ys, xs]
        yy, xx = np.mgrid[ys, xs]
        wgt = np.exp(-((xx - kp.x) ** 2 + (yy - kp.y) ** 2) / (2 * (1.5 * kp.sigma) ** 2))
        hist = np.zeros(36)
        bins = ((a + math.pi) / (2 * math.pi) * 36).astype(int) % 36
        np.add.at(hist, bins.ravel(), (m * wgt).ravel())
        # smooth circularly, take the peak
        hist = np.convolve(np.r_[hist[-2:], hist, hist[:2]], [1, 4, 6, 4, 1], "same")[2:-2] / 16.0
        peak = int(hist.argmax())
        theta = (peak + 0.5) / 36.0 * 2 * math.pi - math.pi
        out.append(
            Keypoint(kp.x, kp.y, kp.sigma, float(theta), kp.response)
        )
    return out


DESC_CELLS = 4
DESC_BINS = 8
DESC_WIDTH = DESC_CELLS * DESC_BINS * DESC_CELLS


def compute_descriptors(field: np.ndarray, valid: np.ndarray, kps: list[Keypoint]):
    """128-dim (4x4 cells x 8 orientations) descriptors, rotation-aligned."""
    img = _normalize_field(field, valid)
    gy, gx = np.gradient(img)
    mag = np.hypot(gx, gy)
    ang = np.arctan2(gy, gx)
    h, w = img.shape
    descs = np.zeros((len(kps), DESC_WIDTH), np.float32)
    half = DESC_CELLS * 2  # cell size 4 at sigma 1.6 scale unit

    grid = np.arange(-half, half) + 0.5
    gxx, gyy = np.meshgrid(grid, grid)  # sample lattice in scale units
    cell_x = ((gxx - 0.5 + half) * DESC_CELLS // (2 * half)).astype(int)
    cell_y = ((gyy - 0.5 + half) * DESC_CELLS // (2 * half)).astype(int)
    for ki, kp in enumerate(kps):
        c, s = math.cos(kp.orientation), math.sin(kp.orientation)
        ox = gxx * kp.sigma
        oy = gyy * kp.sigma
        px = kp.x + c * ox - s * oy
        py = kp.y + s * ox + c * oy
        ix = np.rint(px).astype(int)
        iy = np.rint(py).astype(int)
        ok = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
        ixc = np.clip(ix, 0, w - 1)
        iyc = np.clip(iy, 0, h - 1)
        m = np.where(ok, mag[iyc, ixc], 0.0)
        theta = ang[iyc, ixc] - kp.orientation
        b = (((theta + math.pi) / (2 * math.pi)) * DESC_BINS).astype(int) % DESC_BINS
        wgt = np.exp(-(ox**2 + oy**2) / (2 * (half * kp.sigma * 0.6) ** 2))
        vec = np.zeros((DESC_CELLS, DESC_CELLS, DESC_BINS))
        np.add.at(vec, (cell_y, cell_x, b), m * wgt)
        v = vec.ravel()
        n = np.linalg.norm(v)
        if n > 1e-12:
            v = np.minimum(v / n, 0.2)
            n2 = np.linalg.norm(v)
            if n2 > 1e-12:
                v = v / n2
        descs[ki] = v
    return descs


def match_descriptors(d1: np.ndarray, d2: np.ndarray, ratio: float = RATIO_TEST):
    """Lowe ratio matches (indices into d1, d2)."""
    if len(d1) == 0 or len(d2) < 2:
        return []
    out = []
    d2sq = (d2**2).sum(axis=1)
    for i, v in enumerate(d1):
        dist = d2sq - 2.0 * (d2 @ v) + (v**2).sum()
        order = np.argpartition(dist, 1)[:2]
        a, b = (order if dist[order[0]] <= dist[order[1]] else order[::-1])
        if dist[a] < (ratio**2) * dist[b]:
            out.append((i, int(a)))
    return out


def _rigid_fit(src: np.ndarray, dst: np.ndarray):
    """Least-squares rotation+translation mapping src points onto dst."""
    cs = src.mean(axis=0)
    cd = dst.mean(axis=0)
    a = src - cs
    b = dst - cd
    num = (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]).sum()
    den = (a * b).sum()
    theta = math.atan2(num, den)
    c, s = math.cos(theta), math.sin(theta)
    R = np.array([[c, -s], [s, c]])
    t = cd - R @ cs
    return theta, t


def consensus_rigid_transform(
    pts_src: np.ndarray,
    pts_dst: np.ndarray,
    inlier_radius: float = INLIER_RADIUS_PX,
    min_inliers: int = MIN_INLIERS,
    iterations: int = 200,
    seed: int = 0,
):
    """Robust SE(2) fit src->dst; returns (theta, t, inlier_mask) or None."""
    n = len(pts_src)
    if n < min_inliers:
        return None
    rng = np.random.default_rng(seed + n)
    best_mask = None
    best_count = 0
    for _ in range(iterations):
        i, j = rng.choice(n, size=2, replace=False)
        if np.allclose(pts_src[i], pts_src[j]):
            continue
        theta, t = _rigid_fit(pts_src[[i, j]], pts_dst[[i, j]])
        c, s = math.cos(theta), math.sin(theta)
        mapped = pts_src @ np.array([[c, s], [-s, c]]) + t
        d = np.linalg.norm(mapped - pts_dst, axis=1)
        mask = d < inlier_radius
        if mask.sum() > best_count:
            best_count = int(mask.sum())
            best_mask = mask
    if best_mask is None or best_count < min_inliers:
        return None
    theta, t = _rigid_fit(pts_src[best_mask], pts_dst[best_mask])
    c, s = math.cos(theta), math.sin(theta)
    mapped = pts_src @ np.array([[c, s], [-s, c]]) + t
    d = np.linalg.norm(mapped - pts_dst, axis=1)
    mask = d < inlier_radius
    if mask.sum() < min_inliers:
        return None
    theta, t = _rigid_fit(pts_src[mask], pts_dst[mask])
    return theta, t, mask
