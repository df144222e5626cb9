"""Poisson integrator against analytic and discrete oracles."""

import time

import numpy as np
import pytest

from gelsphere.core import (
    ContactMask,
    EmptyMask,
    GradientField,
    NonFiniteGradient,
    finite_difference_gradient,
    integrate_poisson,
)

PITCH = 0.125


def circular_mask(shape, center, radius_px):
    return ContactMask(center=center, radius=radius_px, shape=shape)


class TestPoissonBasics:
    def test_zero_gradient_gives_zero_height(self):
        shape = (64, 64)
        g = GradientField(
            gx=np.zeros(shape), gy=np.zeros(shape), valid_mask=np.ones(shape, bool)
        )
        hm = integrate_poisson(g, circular_mask(shape, (31.5, 31.5), 20), PITCH)
        assert np.abs(hm.h).max() < 1e-12

    def test_empty_mask_raises(self):
        shape = (16, 16)
        g = GradientField(
            gx=np.zeros(shape), gy=np.zeros(shape), valid_mask=np.ones(shape, bool)
        )
        with pytest.raises(EmptyMask):
            integrate_poisson(g, circular_mask(shape, (8, 8), 0), PITCH)

    def test_nonfinite_raises(self):
        shape = (16, 16)
        gx = np.zeros(shape)
        gx[8, 8] = np.nan
        g = GradientField.__new__(GradientField)
        object.__setattr__(g, "gx", gx)
        object.__setattr__(g, "gy", np.zeros(shape))
        object.__setattr__(g, "valid_mask", np.ones(shape, bool))
        with pytest.raises(NonFiniteGradient):
            integrate_poisson(g, circular_mask(shape, (8, 8), 5), PITCH)

    def test_linearity(self):
        rng = np.random.default_rng(3)
        shape = (48, 48)
        gx = rng.normal(size=shape)
        gy = rng.normal(size=shape)
        g1 = GradientField(gx=gx, gy=gy, valid_mask=np.ones(shape, bool))
        g3 = GradientField(gx=3 * gx, gy=3 * gy, valid_mask=np.ones(shape, bool))
        m = circular_mask(shape, (23.5, 23.5), 18)
        h1 = integrate_poisson(g1, m, PITCH)
        h3 = integrate_poisson(g3, m, PITCH)
        assert np.abs(h3.h - 3 * h1.h).max() < 1e-9


class TestPoissonAnalytic:
    def paraboloid(self, shape, center, depth, radius_mm):
        h, w = shape
        yy, xx = np.mgrid[0:h, 0:w]
        sx = (xx - center[0]) * PITCH
        sy = (yy - center[1]) * PITCH
        rho2 = sx**2 + sy**2
        inside = rho2 <= radius_mm**2
        height = np.where(inside, depth * (1.0 - rho2 / radius_mm**2), 0.0)
        gx = np.where(inside, -2.0 * depth * sx / radius_mm**2, 0.0)
        gy = np.where(inside, -2.0 * depth * sy / radius_mm**2, 0.0)
        return height, GradientField(gx=gx, gy=gy, valid_mask=inside), inside

    def test_paraboloid_recovery(self):
        shape = (120, 120)
        center = (59.5, 59.5)
        depth, radius_mm = 1.5, 5.0
        h0, g, inside = self.paraboloid(shape, center, depth, radius_mm)
        hm = integrate_poisson(g, circular_mask(shape, center, radius_mm / PITCH), PITCH)
        err = (hm.h - h0)[inside]
        rms = np.sqrt((err**2).mean())
        assert rms < 0.01 * depth

    def test_sphere_cap_recovery(self):
        # 3 mm sphere cap, contact radius 2 mm; exact analytic gradient in.
        # Finer pitch (window_mm is configuration): the mask rim cuts the
        # cap's slope discontinuity, whose smearing scales with pitch.
        pitch = 0.0625
        shape = (128, 128)
        center = (63.5, 63.5)
        R, rc = 3.0, 2.0
        yy, xx = np.mgrid[0 : shape[0], 0 : shape[1]]
        sx = (xx - center[0]) * pitch
        sy = (yy - center[1]) * pitch
        rho2 = sx**2 + sy**2
        inside = rho2 <= rc**2
        denom = np.sqrt(np.maximum(R**2 - rho2, 1e-12))
        g = GradientField(
            gx=np.where(inside, -sx / denom, 0.0),
            gy=np.where(inside, -sy / denom, 0.0),
            valid_mask=inside,
        )
        cap_depth = R - np.sqrt(R**2 - rc**2)
        h0 = np.where(inside, np.sqrt(np.maximum(R**2 - rho2, 0.0)) - (R - cap_depth), 0.0)
        hm = integrate_poisson(g, circular_mask(shape, center, rc / pitch), pitch)
        err = np.abs(hm.h - h0)[inside]
        assert err.max() < 0.02 * cap_depth
        rms = np.sqrt(((hm.h - h0)[inside] ** 2).mean())
        assert rms < 0.01 * cap_depth

    def test_full_sensor_solve_under_one_second(self):
        shape = (240, 240)
        rng = np.random.default_rng(0)
        g = GradientField(
            gx=rng.normal(size=shape),
            gy=rng.normal(size=shape),
            valid_mask=np.ones(shape, bool),
        )
        m = circular_mask(shape, (119.5, 119.5), 118)
        integrate_poisson(g, m, PITCH)  # warm caches
        t0 = time.perf_counter()
        integrate_poisson(g, m, PITCH)
        assert time.perf_counter() - t0 < 1.0


class TestPoissonExactness:
    def test_discrete_gradient_recovered_exactly(self):
        # Any field that IS a forward-difference gradient of some h0 vanishing
        # on the mask boundary comes back as h0 (quadratic objective).
        rng = np.random.default_rng(11)
        shape = (80, 80)
        center = (39.5, 39.5)
        radius_px = 30.0
        yy, xx = np.mgrid[0 : shape[0], 0 : shape[1]]
        dist = np.hypot(xx - center[0], yy - center[1])
        # Smooth random h0 tapered to zero well inside the mask
        h0 = rng.normal(size=shape)
        from scipy.ndimage import gaussian_filter

        h0 = gaussian_filter(h0, 4.0)
        taper = np.clip((radius_px - 4 - dist) / 8.0, 0.0, 1.0)
        h0 = h0 * taper
        gx, gy = finite_difference_gradient(h0, PITCH, forward=True)
        g = GradientField(gx=gx, gy=gy, valid_mask=np.ones(shape, bool))
        hm = integrate_poisson(
            g, circular_mask(shape, center, radius_px), PITCH, staggered=True
        )
        scale = np.abs(h0).max()
        inside = hm.valid_mask
        assert np.abs(hm.h - h0)[inside].max() < 1e-6 * scale
