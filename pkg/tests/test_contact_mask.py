"""Contact-mask estimation against brute-force circle oracles."""

import numpy as np
import pytest

from gelsphere.core import TactileFrame, estimate_contact_mask


def make_frame(pixels, fid=0):
    return TactileFrame(pixels=pixels, timestamp_us=fid * 100_000, frame_id=fid)


def disc_frame(shape, center, radius, level=60):
    h, w = shape
    px = np.zeros((h, w, 3), np.uint8)
    yy, xx = np.mgrid[0:h, 0:w]
    inside = (xx - center[0]) ** 2 + (yy - center[1]) ** 2 <= radius**2
    px[inside] = level
    return make_frame(px, fid=1)


class TestEstimateContactMask:
    def test_no_contact_when_identical(self):
        bg = make_frame(np.full((64, 64, 3), 40, np.uint8))
        m = estimate_contact_mask(make_frame(bg.pixels.copy(), fid=1), bg)
        assert m.radius == 0
        assert m.empty

    def test_synthetic_disc(self):
        bg = make_frame(np.zeros((240, 240, 3), np.uint8))
        frame = disc_frame((240, 240), (120, 120), 30)
        m = estimate_contact_mask(frame, bg)
        # Brute-force oracle: minimal circle about the energy centroid
        e = np.abs(
            frame.pixels.astype(int) - bg.pixels.astype(int)
        ).sum(axis=2)
        ys, xs = np.nonzero(e)
        ccx, ccy = xs.mean(), ys.mean()
        oracle_r = np.hypot(xs - ccx, ys - ccy).max()
        assert abs(m.center[0] - 120) <= 1 and abs(m.center[1] - 120) <= 1
        assert oracle_r == pytest.approx(30, abs=1)
        assert 30 <= m.radius <= 33

    def test_coverage_monotonicity(self):
        rng = np.random.default_rng(5)
        bg = make_frame(np.zeros((96, 96, 3), np.uint8))
        for _ in range(10):
            px = np.zeros((96, 96, 3), np.uint8)
            # random blobby energy: a few random discs of random level
            for _ in range(rng.integers(1, 5)):
                c = rng.integers(20, 76, size=2)
                r = rng.integers(3, 18)
                yy, xx = np.mgrid[0:96, 0:96]
                inside = (xx - c[0]) ** 2 + (yy - c[1]) ** 2 <= r**2
                px[inside] = rng.integers(20, 120)
            frame = make_frame(px, fid=1)
            radii = [
                estimate_contact_mask(frame, bg, coverage_fraction=q).radius
                for q in (0.5, 0.7, 0.8, 0.9, 0.95, 1.0)
            ]
            assert all(r2 >= r1 - 1e-12 for r1, r2 in zip(radii, radii[1:]))

    def test_raster_matches_circle_definition(self):
        bg = make_frame(np.zeros((64, 64, 3), np.uint8))
        m = estimate_contact_mask(disc_frame((64, 64), (30, 34), 10), bg)
        yy, xx = np.mgrid[0:64, 0:64]
        expect = (xx - m.center[0]) ** 2 + (yy - m.center[1]) ** 2 <= m.radius**2
        assert (m.raster == expect).all()

    def test_below_threshold_energy_ignored(self):
        bg = make_frame(np.zeros((64, 64, 3), np.uint8))
        px = np.full((64, 64, 3), 2, np.uint8)  # sums to 6 < threshold 12
        m = estimate_contact_mask(make_frame(px, fid=1), bg)
        assert m.radius == 0
