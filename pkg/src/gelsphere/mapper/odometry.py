"""Frame-to-frame SE(2) alignment of normal maps (tactile odometry).

Gauss-Newton on sum ||n_prev(p) - Rz(theta) n_cur(W(p))||^2 with a 3-level
coarse-to-fine pyramid and bilinear warps.  The residual rotates the
in-plane normal components along with the warp so pure rotations are
modeled exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..core.types import NormalMap, PlanarPose, SensorGeometry

PYRAMID_LEVELS = 3
MAX_ITERATIONS = 50
STEP_TOL = 1e-8
MIN_OVERLAP_FRACTION = 0.20
RESIDUAL_LIMIT = 0.25  # mean per-pixel residual norm above this = no convergence
INFO_FLOOR = 1e-3


class InsufficientOverlap(Exception):
    pass


class NoConvergence(Exception):
    pass


@dataclass
class MotionEstimate:
    delta: PlanarPose
    residual: float  # root mean squared residual over matched pixels
    information: np.ndarray  # 3x3, Gauss-Newton Hessian at convergence
    matched_pixels: int
    degenerate: bool = False


def _binomial_blur(n: np.ndarray, ok: np.ndarray):
    """Validity-weighted 3x3 binomial low-pass (anti-aliasing before 2x)."""
    okf = ok.astype(np.float64)
    acc = np.zeros_like(n)
    wacc = np.zeros(ok.shape)
    kernel = ((1, 2, 1), (2, 4, 2), (1, 2, 1))
    h, w = ok.shape
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            kw = kernel[dy + 1][dx + 1]
            ys = slice(max(dy, 0), h + min(dy, 0))
            yd = slice(max(-dy, 0), h + min(-dy, 0))
            xs = slice(max(dx, 0), w + min(dx, 0))
            xd = slice(max(-dx, 0), w + min(-dx, 0))
            acc[yd, xd] += kw * n[ys, xs] * okf[ys, xs, None]
            wacc[yd, xd] += kw * okf[ys, xs]
    out = np.zeros_like(n)
    sel = wacc > 0
    out[sel] = acc[sel] / wacc[sel, None]
    return out


def _downsample(n: np.ndarray, ok: np.ndarray):
    n = _binomial_blur(n, ok)
    h, w = ok.shape
    h2, w2 = h // 2, w // 2
    n = n[: h2 * 2, : w2 * 2]
    ok = ok[: h2 * 2, : w2 * 2]
    okf = ok.astype(np.float64)
    cnt = (
        okf[0::2, 0::2] + okf[0::2, 1::2] + okf[1::2, 0::2] + okf[1::2, 1::2]
    )
    acc = (
        n[0::2, 0::2] * okf[0::2, 0::2, None]
        + n[0::2, 1::2] * okf[0::2, 1::2, None]
        + n[1::2, 0::2] * okf[1::2, 0::2, None]
        + n[1::2, 1::2] * okf[1::2, 1::2, None]
    )
    ok2 = cnt == 4.0
    out = np.zeros_like(acc)
    sel = cnt > 0
    out[sel] = acc[sel] / cnt[sel, None]
    norm = np.linalg.norm(out, axis=-1, keepdims=True)
    np.divide(out, norm, out=out, where=norm > 1e-12)
    out[~ok2] = (0.0, 0.0, 1.0)
    return out, ok2


def _grads(n: np.ndarray):
    """Central-difference pixel-space gradients per channel."""
    gu = np.zeros_like(n)
    gv = np.zeros_like(n)
    gu[:, 1:-1] = (n[:, 2:] - n[:, :-2]) * 0.5
    gv[1:-1, :] = (n[2:, :] - n[:-2, :]) * 0.5
    return gu, gv


def _erode(ok: np.ndarray) -> np.ndarray:
    out = ok.copy()
    out[0, :] = out[-1, :] = False
    out[:, 0] = out[:, -1] = False
    out[1:-1, 1:-1] = (
        ok[1:-1, 1:-1]
        & ok[:-2, 1:-1]
        & ok[2:, 1:-1]
        & ok[1:-1, :-2]
        & ok[1:-1, 2:]
    )
    return out


def estimate_motion(
    prev: NormalMap,
    prev_valid: np.ndarray,
    cur: NormalMap,
    cur_valid: np.ndarray,
    geom: SensorGeometry,
    init: PlanarPose = PlanarPose(),
) -> MotionEstimate:
    """Relative pose delta such that cur's pose = prev's pose compose delta.

    Raises InsufficientOverlap when the valid regions share less than 20%
    of the smaller one, NoConvergence when the residual stays above the
    convergence limit after the iteration budget.
    """
    prev_ok = prev.valid_mask & np.asarray(prev_valid, bool)
    cur_ok = cur.valid_mask & np.asarray(cur_valid, bool)
    n_prev_px = int(prev_ok.sum())
    n_cur_px = int(cur_ok.sum())
    if min(n_prev_px, n_cur_px) == 0:
        raise InsufficientOverlap("no valid pixels")

    # pyramid, finest last
    levels = [(prev.n, prev_ok, cur.n, cur_ok)]
    for _ in range(PYRAMID_LEVELS - 1):
        pn, pok, cn, cok = levels[-1]
        levels.append((*_downsample(pn, pok), *_downsample(cn, cok)))
    levels.reverse()

    cx0, cy0 = geom.optical_center
    tx, ty, th = init.x, init.y, init.theta
    last = None
    for li, (pn, pok, cn, cok) in enumerate(levels):
        scale = 2 ** (len(levels) - 1 - li)
        pitch = geom.pixel_pitch * scale
        cx = (cx0 + 0.5) / scale - 0.5
        cy = (cy0 + 0.5) / scale - 0.5
        h, w = pok.shape
        yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
        sx = (xx - cx) * pitch
        sy = (yy - cy) * pitch
        gu, gv = _grads(cn)
        cok_s = _erode(cok)
        pn_c = np.ascontiguousarray(pn)
        cn_c = np.ascontiguousarray(cn)

        def evaluate(px, py, pth):
            return kernels.gn_accumulate(
                pn_c, pok, cn_c, cok_s, gu, gv, sx, sy,
                px, py, pth, cx, cy, pitch,
            )

        H, g, ssq, count = evaluate(tx, ty, th)
        if count == 0:
            continue
        last = (H, ssq, count)
        for _ in range(MAX_ITERATIONS):
            Hd = H + 1e-12 * np.eye(3)
            try:
                step = -np.linalg.solve(Hd, g)
            except np.linalg.LinAlgError:
                break
            # backtrack: blurred periodic texture makes the coarse cost
            # nearly flat, and an unchecked full step can hop one texture
            # period into the wrong basin
            cost = ssq / max(count, 1)
            accepted = False
            for _ in range(8):
                cand = (tx + step[0], ty + step[1], th + step[2])
                H2, g2, ssq2, count2 = evaluate(*cand)
                if count2 > 0 and ssq2 / count2 <= cost * (1 + 1e-12):
                    tx, ty, th = cand
                    H, g, ssq, count = H2, g2, ssq2, count2
                    last = (H, ssq, count)
                    accepted = True
                    break
                step = step * 0.5
            if not accepted:
                break
            if max(abs(step[0]), abs(step[1]), abs(step[2])) < STEP_TOL:
                break

    if last is None:
        raise InsufficientOverlap("alignment never matched any pixels")
    H, ssq, count = last
    if count < MIN_OVERLAP_FRACTION * min(n_prev_px, n_cur_px):
        raise InsufficientOverlap(
            f"overlap {count} px < {MIN_OVERLAP_FRACTION:.0%} of smaller mask"
        )
    rms = math.sqrt(ssq / max(count, 1))
    if rms > RESIDUAL_LIMIT:
        raise NoConvergence(f"residual {rms:.3f} above {RESIDUAL_LIMIT}")

    info = H.copy()
    # floor the information for conditioning; flag near-floor as degenerate
    evals = np.linalg.eigvalsh(0.5 * (info + info.T))
    degenerate = bool(evals.min() < 10.0 * INFO_FLOOR)
    info = 0.5 * (info + info.T) + INFO_FLOOR * np.eye(3)
    return MotionEstimate(
        delta=PlanarPose(tx, ty, th),
        residual=rms,
        information=info,
        matched_pixels=count,
        degenerate=degenerate,
    )


def warp_normal_map(
    nm: NormalMap,
    valid: np.ndarray,
    delta: PlanarPose,
    geom: SensorGeometry,
) -> tuple[NormalMap, np.ndarray]:
    """Synthesize the view after moving the sensor by `delta` (test oracle).

    Output pixel p takes the source value at W(p) = R(-theta)(p - t) with
    in-plane normal components rotated by -theta (the inverse of the
    alignment model, so estimate_motion(nm, warp(nm, d)) recovers d).
    """
    h, w = nm.shape
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    cx, cy = geom.optical_center
    pitch = geom.pixel_pitch
    sx = (xx - cx) * pitch
    sy = (yy - cy) * pitch
    ct, st = math.cos(delta.theta), math.sin(delta.theta)
    # alignment model: n_prev(p) = Rz(theta) n_cur(R(-theta)(p - t)); so the
    # synthesized view samples the source at delta applied to its own coords
    qx = ct * sx - st * sy + delta.x
    qy = st * sx + ct * sy + delta.y
    u = (qx / pitch + cx).ravel()
    v = (qy / pitch + cy).ravel()
    ok = nm.valid_mask & np.asarray(valid, bool)
    vals, good = kernels.bilinear_sample(np.ascontiguousarray(nm.n), ok, u, v)
    out = vals.reshape(h, w, 3)
    # rotate sampled normals into the new frame
    rx = ct * out[..., 0] + st * out[..., 1]
    ry = -st * out[..., 0] + ct * out[..., 1]
    out[..., 0] = rx
    out[..., 1] = ry
    good = good.reshape(h, w)
    norm = np.linalg.norm(out, axis=-1, keepdims=True)
    np.divide(out, norm, out=out, where=norm > 1e-12)
    out[~good] = (0.0, 0.0, 1.0)
    return NormalMap(n=out, valid_mask=good), good
