"""Pure-numpy reference implementations of the hot kernels.

Every function here has a numba twin in nb_backend; the two must agree to
floating-point noise.  Keep these vectorized but straightforward -- they are
the semantic reference and the fallback when numba is disabled.
"""

from __future__ import annotations

import math

import numpy as np

NAME = "numpy"


def bilinear_sample(img: np.ndarray, ok: np.ndarray, u: np.ndarray, v: np.ndarray):
    """Sample (H, W, C) img at float pixel coords; valid iff all 4 corners ok.

    Returns (values (N, C), valid (N,)).
    """
    H, W = ok.shape
    u = np.asarray(u, np.float64)
    v = np.asarray(v, np.float64)
    u0 = np.floor(u).astype(np.int64)
    v0 = np.floor(v).astype(np.int64)
    inside = (u0 >= 0) & (v0 >= 0) & (u0 < W - 1) & (v0 < H - 1)
    u0c = np.clip(u0, 0, W - 2)
    v0c = np.clip(v0, 0, H - 2)
    fu = u - u0c
    fv = v - v0c
    good = (
        inside
        & ok[v0c, u0c]
        & ok[v0c, u0c + 1]
        & ok[v0c + 1, u0c]
        & ok[v0c + 1, u0c + 1]
    )
    w00 = (1 - fu) * (1 - fv)
    w10 = fu * (1 - fv)
    w01 = (1 - fu) * fv
    w11 = fu * fv
    vals = (
        img[v0c, u0c] * w00[:, None]
        + img[v0c, u0c + 1] * w10[:, None]
        + img[v0c + 1, u0c] * w01[:, None]
        + img[v0c + 1, u0c + 1] * w11[:, None]
    )
    vals[~good] = 0.0
    return vals, good


def gn_accumulate(
    prev_n: np.ndarray,
    prev_ok: np.ndarray,
    cur_n: np.ndarray,
    cur_ok: np.ndarray,
    cur_gu: np.ndarray,
    cur_gv: np.ndarray,
    sx: np.ndarray,
    sy: np.ndarray,
    tx: float,
    ty: float,
    theta: float,
    cx: float,
    cy: float,
    pitch: float,
):
    """One Gauss-Newton accumulation pass for SE(2) normal-map alignment.

    Residual per valid pixel: r = n_prev(s) - Rz(theta) n_cur(W(s)) with the
    warp W(s) = R(-theta)(s - t) mapping prev sensor-mm coords into the
    current frame.  Returns (H 3x3, g 3, ssq, count).
    """
    ys, xs = np.nonzero(prev_ok)
    s = np.stack([sx[ys, xs], sy[ys, xs]], axis=1)
    ct, st = math.cos(theta), math.sin(theta)
    d = s - np.array([tx, ty])
    # R(-theta) @ d
    qx = ct * d[:, 0] + st * d[:, 1]
    qy = -st * d[:, 0] + ct * d[:, 1]
    u = qx / pitch + cx
    v = qy / pitch + cy

    nc, good = bilinear_sample(cur_n, cur_ok, u, v)
    gu, _ = bilinear_sample(cur_gu, cur_ok, u, v)
    gv, _ = bilinear_sample(cur_gv, cur_ok, u, v)

    np_sel = prev_n[ys, xs]
    # m = Rz(theta) @ nc
    m = np.empty_like(nc)
    m[:, 0] = ct * nc[:, 0] - st * nc[:, 1]
    m[:, 1] = st * nc[:, 0] + ct * nc[:, 1]
    m[:, 2] = nc[:, 2]
    r = np_sel - m

    # Spatial gradient in mm: G = [gu gv] / pitch, columns are d(n)/dq.
    # J_t[:, k] = Rz(theta) @ G @ R(-theta) @ e_k
    # columns of R(-theta): e1 -> (ct, -st), e2 -> (st, ct)
    Gx = gu / pitch  # dn/dqx
    Gy = gv / pitch  # dn/dqy
    a1 = Gx * ct + Gy * (-st)  # G @ R(-theta) e1
    a2 = Gx * st + Gy * ct  # G @ R(-theta) e2

    def rz(vec):
        out = np.empty_like(vec)
        out[:, 0] = ct * vec[:, 0] - st * vec[:, 1]
        out[:, 1] = st * vec[:, 0] + ct * vec[:, 1]
        out[:, 2] = vec[:, 2]
        return out

    Jtx = rz(a1)
    Jty = rz(a2)

    # dW/dtheta = -R'(-theta) @ (s - t); R'(alpha) at alpha=-theta
    rp_xx, rp_xy = st, -ct
    rp_yx, rp_yy = ct, st
    wx = -(rp_xx * d[:, 0] + rp_xy * d[:, 1])
    wy = -(rp_yx * d[:, 0] + rp_yy * d[:, 1])
    gw = Gx * wx[:, None] + Gy * wy[:, None]
    # dRz/dtheta @ nc
    dn = np.zeros_like(nc)
    dn[:, 0] = -st * nc[:, 0] - ct * nc[:, 1]
    dn[:, 1] = ct * nc[:, 0] - st * nc[:, 1]
    Jth = -dn - rz(gw)
    # r = n_prev - Rz nc(W): d r/d theta = -(dRz)nc - Rz G dW/dtheta
    # (signs already folded above: Jth = -(dRz nc) - Rz(G @ dW/dtheta))

    J = np.stack([Jtx, Jty, Jth], axis=2)  # (N, 3ch, 3par)
    J[~good] = 0.0
    r[~good] = 0.0

    Hm = np.einsum("nck,ncl->kl", J, J)
    g = np.einsum("nck,nc->k", J, r)
    ssq = float((r[good] ** 2).sum())
    count = int(good.sum())
    return Hm, g, ssq, count


def splat_add(
    values: np.ndarray,
    weights: np.ndarray,
    u: np.ndarray,
    v: np.ndarray,
    acc: np.ndarray,
    acc_w: np.ndarray,
) -> None:
    """Bilinearly splat weighted samples into accumulator grids (in place).

    values (N, C), weights (N,), float target coords u, v on acc's grid.
    acc (H, W, C), acc_w (H, W).
    """
    H, W = acc_w.shape
    u0 = np.floor(u).astype(np.int64)
    v0 = np.floor(v).astype(np.int64)
    inside = (u0 >= 0) & (v0 >= 0) & (u0 < W - 1) & (v0 < H - 1)
    u0 = u0[inside]
    v0 = v0[inside]
    fu = (u[inside] - u0).astype(np.float64)
    fv = (v[inside] - v0).astype(np.float64)
    vals = values[inside]
    wts = weights[inside]
    for du, dv, f in (
        (0, 0, (1 - fu) * (1 - fv)),
        (1, 0, fu * (1 - fv)),
        (0, 1, (1 - fu) * fv),
        (1, 1, fu * fv),
    ):
        w = wts * f
        np.add.at(acc, (v0 + dv, u0 + du), vals * w[:, None])
        np.add.at(acc_w, (v0 + dv, u0 + du), w)


def shade(
    n: np.ndarray,
    px_mm: np.ndarray,
    py_mm: np.ndarray,
    surf_z: np.ndarray,
    light_pos: np.ndarray,
    light_intensity: np.ndarray,
    falloff_d0: float,
    ambient: float,
    diffuse_albedo: float,
    specular_strength: float,
    shininess: float,
) -> np.ndarray:
    """Per-pixel 3-channel shading in [0, 1] units (not yet quantized).

    Channel c is lit by its own light group at light_pos[c] (sensor mm
    coords), with inverse-square falloff normalized at distance falloff_d0.
    Viewer is along +z.
    """
    H, W = px_mm.shape
    out = np.empty((H, W, 3))
    p = np.stack([px_mm, py_mm, surf_z], axis=-1)
    for c in range(3):
        lv = light_pos[c][None, None, :] - p
        dist = np.linalg.norm(lv, axis=-1)
        l = lv / dist[..., None]
        atten = light_intensity[c] * (falloff_d0**2) / (dist**2)
        ndl = np.maximum(0.0, np.einsum("hwk,hwk->hw", n, l))
        val = ambient + diffuse_albedo * ndl * atten
        if specular_strength > 0.0:
            # r = 2(n.l)n - l; viewer v = +z so r.v = r_z
            rz = 2.0 * ndl * n[..., 2] - l[..., 2]
            val = val + specular_strength * np.maximum(0.0, rz) ** shininess * atten
        out[..., c] = val
    return out
