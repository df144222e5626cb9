"""numba-compiled hot kernels; loop twins of np_backend.

fastmath stays off so both backends agree to summation-order noise and runs
are reproducible.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True)
def _sample3(img, ok, u, v, out):
    H, W = ok.shape
    u0 = int(math.floor(u))
    v0 = int(math.floor(v))
    if u0 < 0 or v0 < 0 or u0 >= W - 1 or v0 >= H - 1:
        return False
    if not (ok[v0, u0] and ok[v0, u0 + 1] and ok[v0 + 1, u0] and ok[v0 + 1, u0 + 1]):
        return False
    fu = u - u0
    fv = v - v0
    w00 = (1.0 - fu) * (1.0 - fv)
    w10 = fu * (1.0 - fv)
    w01 = (1.0 - fu) * fv
    w11 = fu * fv
    for c in range(img.shape[2]):
        out[c] = (
            img[v0, u0, c] * w00
            + img[v0, u0 + 1, c] * w10
            + img[v0 + 1, u0, c] * w01
            + img[v0 + 1, u0 + 1, c] * w11
        )
    return True


def bilinear_sample(img, ok, u, v):
    n = u.shape[0]
    c = img.shape[2]
    vals = np.zeros((n, c))
    good = np.zeros(n, dtype=np.bool_)
    _bilinear_sample_loop(img, ok, u, v, vals, good)
    return vals, good


@njit(cache=True)
def _bilinear_sample_loop(img, ok, u, v, vals, good):
    tmp = np.zeros(img.shape[2])
    for i in range(u.shape[0]):
        if _sample3(img, ok, u[i], v[i], tmp):
            good[i] = True
            for c in range(img.shape[2]):
                vals[i, c] = tmp[c]


@njit(cache=True)
def _gn_accumulate_loop(
    prev_n, prev_ok, cur_n, cur_ok, cur_gu, cur_gv, sx, sy,
    tx, ty, theta, cx, cy, pitch, Hm, g,
):
    ct = math.cos(theta)
    st = math.sin(theta)
    ssq = 0.0
    count = 0
    nc = np.zeros(3)
    gu = np.zeros(3)
    gv = np.zeros(3)
    J = np.zeros((3, 3))
    Hrows, Wcols = prev_ok.shape
    for yy in range(Hrows):
        for xx in range(Wcols):
            if not prev_ok[yy, xx]:
                continue
            dx = sx[yy, xx] - tx
            dy = sy[yy, xx] - ty
            qx = ct * dx + st * dy
            qy = -st * dx + ct * dy
            u = qx / pitch + cx
            v = qy / pitch + cy
            if not _sample3(cur_n, cur_ok, u, v, nc):
                continue
            _sample3(cur_gu, cur_ok, u, v, gu)
            _sample3(cur_gv, cur_ok, u, v, gv)

            m0 = ct * nc[0] - st * nc[1]
            m1 = st * nc[0] + ct * nc[1]
            m2 = nc[2]
            r0 = prev_n[yy, xx, 0] - m0
            r1 = prev_n[yy, xx, 1] - m1
            r2 = prev_n[yy, xx, 2] - m2

            wx = -(st * dx - ct * dy)
            wy = -(ct * dx + st * dy)
            for c in range(3):
                gxc = gu[c] / pitch
                gyc = gv[c] / pitch
                J[c, 0] = gxc * ct - gyc * st  # G @ R(-theta) e1
                J[c, 1] = gxc * st + gyc * ct  # G @ R(-theta) e2
                J[c, 2] = gxc * wx + gyc * wy  # G @ dW/dtheta
            # apply Rz(theta) to the xy components of each Jacobian column
            for k in range(3):
                j0 = ct * J[0, k] - st * J[1, k]
                j1 = st * J[0, k] + ct * J[1, k]
                J[0, k] = j0
                J[1, k] = j1
            # dRz/dtheta @ nc contributes only to the theta column
            J[0, 2] = -(-st * nc[0] - ct * nc[1]) - J[0, 2]
            J[1, 2] = -(ct * nc[0] - st * nc[1]) - J[1, 2]
            J[2, 2] = -J[2, 2]
            # J columns tx, ty keep the +Rz G R(-theta) sign from np_backend
            for k in range(3):
                g[k] += J[0, k] * r0 + J[1, k] * r1 + J[2, k] * r2
                for l in range(3):
                    Hm[k, l] += (
                        J[0, k] * J[0, l] + J[1, k] * J[1, l] + J[2, k] * J[2, l]
                    )
            ssq += r0 * r0 + r1 * r1 + r2 * r2
            count += 1
    return ssq, count


def gn_accumulate(
    prev_n, prev_ok, cur_n, cur_ok, cur_gu, cur_gv, sx, sy,
    tx, ty, theta, cx, cy, pitch,
):
    Hm = np.zeros((3, 3))
    g = np.zeros(3)
    ssq, count = _gn_accumulate_loop(
        prev_n, prev_ok, cur_n, cur_ok, cur_gu, cur_gv, sx, sy,
        float(tx), float(ty), float(theta), float(cx), float(cy), float(pitch),
        Hm, g,
    )
    return Hm, g, ssq, count


@njit(cache=True)
def _splat_add_loop(values, weights, u, v, acc, acc_w):
    H, W = acc_w.shape
    C = values.shape[1]
    for i in range(u.shape[0]):
        u0 = int(math.floor(u[i]))
        v0 = int(math.floor(v[i]))
        if u0 < 0 or v0 < 0 or u0 >= W - 1 or v0 >= H - 1:
            continue
        fu = u[i] - u0
        fv = v[i] - v0
        w00 = weights[i] * (1.0 - fu) * (1.0 - fv)
        w10 = weights[i] * fu * (1.0 - fv)
        w01 = weights[i] * (1.0 - fu) * fv
        w11 = weights[i] * fu * fv
        for c in range(C):
            acc[v0, u0, c] += values[i, c] * w00
            acc[v0, u0 + 1, c] += values[i, c] * w10
            acc[v0 + 1, u0, c] += values[i, c] * w01
            acc[v0 + 1, u0 + 1, c] += values[i, c] * w11
        acc_w[v0, u0] += w00
        acc_w[v0, u0 + 1] += w10
        acc_w[v0 + 1, u0] += w01
        acc_w[v0 + 1, u0 + 1] += w11


def splat_add(values, weights, u, v, acc, acc_w):
    _splat_add_loop(
        np.ascontiguousarray(values, np.float64),
        np.ascontiguousarray(weights, np.float64),
        np.ascontiguousarray(u, np.float64),
        np.ascontiguousarray(v, np.float64),
        acc,
        acc_w,
    )


@njit(cache=True)
def _shade_loop(
    n, px, py, surf_z, light_pos, light_intensity, falloff_d0,
    ambient, diffuse_albedo, specular_strength, shininess, out,
):
    H, W = px.shape
    for yy in range(H):
        for xx in range(W):
            for c in range(3):
                lx = light_pos[c, 0] - px[yy, xx]
                ly = light_pos[c, 1] - py[yy, xx]
                lz = light_pos[c, 2] - surf_z[yy, xx]
                dist = math.sqrt(lx * lx + ly * ly + lz * lz)
                lx /= dist
                ly /= dist
                lz /= dist
                atten = light_intensity[c] * falloff_d0 * falloff_d0 / (dist * dist)
                ndl = n[yy, xx, 0] * lx + n[yy, xx, 1] * ly + n[yy, xx, 2] * lz
                if ndl < 0.0:
                    ndl = 0.0
                val = ambient + diffuse_albedo * ndl * atten
                if specular_strength > 0.0:
                    rz = 2.0 * ndl * n[yy, xx, 2] - lz
                    if rz > 0.0:
                        val += specular_strength * rz**shininess * atten
                out[yy, xx, c] = val


def shade(
    n, px_mm, py_mm, surf_z, light_pos, light_intensity, falloff_d0,
    ambient, diffuse_albedo, specular_strength, shininess,
):
    out = np.empty(px_mm.shape + (3,))
    _shade_loop(
        np.ascontiguousarray(n, np.float64),
        np.ascontiguousarray(px_mm, np.float64),
        np.ascontiguousarray(py_mm, np.float64),
        np.ascontiguousarray(surf_z, np.float64),
        np.ascontiguousarray(light_pos, np.float64),
        np.ascontiguousarray(light_intensity, np.float64),
        float(falloff_d0),
        float(ambient),
        float(diffuse_albedo),
        float(specular_strength),
        float(shininess),
        out,
    )
    return out
