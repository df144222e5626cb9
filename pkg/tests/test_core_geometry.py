"""Gradient/normal conversions and SE(2) algebra."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gelsphere.core import (
    GradientField,
    NormalMap,
    PlanarPose,
    apply,
    compose,
    gradients_to_normals,
    inverse,
    normals_to_gradients,
    wrap_angle,
)


def sphere_cap_gradient(shape, center_px, radius_mm, pitch, contact_radius_mm):
    """Analytic oracle: gradients of h = sqrt(R^2 - rho^2) - const inside a cap."""
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w]
    sx = (xx - center_px[0]) * pitch
    sy = (yy - center_px[1]) * pitch
    rho2 = sx**2 + sy**2
    inside = rho2 <= contact_radius_mm**2
    denom = np.sqrt(np.maximum(radius_mm**2 - rho2, 1e-12))
    gx = np.where(inside, -sx / denom, 0.0)
    gy = np.where(inside, -sy / denom, 0.0)
    return GradientField(gx=gx, gy=gy, valid_mask=inside), sx, sy, inside


class TestGradientsToNormals:
    def test_flat_everywhere(self):
        g = GradientField(
            gx=np.zeros((8, 8)), gy=np.zeros((8, 8)), valid_mask=np.ones((8, 8), bool)
        )
        n = gradients_to_normals(g)
        assert np.allclose(n.n[..., 2], 1.0)
        assert np.allclose(n.n[..., :2], 0.0)

    def test_45_degree_slope(self):
        g = GradientField(
            gx=np.ones((4, 4)), gy=np.zeros((4, 4)), valid_mask=np.ones((4, 4), bool)
        )
        n = gradients_to_normals(g)
        expected = np.array([-1.0, 0.0, 1.0]) / math.sqrt(2.0)
        assert np.allclose(n.n, expected[None, None, :])

    def test_hemisphere_cap_matches_analytic_sphere_normals(self):
        # 3 mm cap sampled at 0.125 mm pitch: n must equal the sphere's own
        # normals (P - C)/R flipped toward the camera.
        pitch = 0.125
        R = 3.0
        g, sx, sy, inside = sphere_cap_gradient(
            (48, 48), (23.5, 23.5), R, pitch, contact_radius_mm=2.0
        )
        n = gradients_to_normals(g)
        nz = np.sqrt(np.maximum(R**2 - sx**2 - sy**2, 0.0)) / R
        expected = np.stack([sx / R, sy / R, nz], axis=-1)
        err = np.abs(n.n[inside] - expected[inside])
        assert err.max() < 1e-9

    def test_round_trip_random(self):
        rng = np.random.default_rng(7)
        n = rng.normal(size=(32, 32, 3))
        n[..., 2] = np.abs(n[..., 2]) + 0.35
        n /= np.linalg.norm(n, axis=-1, keepdims=True)
        nm = NormalMap(n=n, valid_mask=np.ones((32, 32), bool))
        back = gradients_to_normals(normals_to_gradients(nm))
        assert np.abs(back.n - nm.n).max() < 1e-9

    def test_grazing_normals_marked_invalid(self):
        n = np.zeros((2, 2, 3))
        n[..., 0] = 1.0
        n[0, 0] = (0, 0, 1)
        g = normals_to_gradients(NormalMap(n=n, valid_mask=np.ones((2, 2), bool)))
        assert g.valid_mask[0, 0]
        assert not g.valid_mask[1, 1]


class TestPlanarPose:
    def test_identity_compose(self):
        p = PlanarPose(3.0, -2.0, 0.4)
        q = compose(PlanarPose.identity(), p)
        assert np.allclose(q.as_array(), p.as_array())
        q = compose(p, PlanarPose.identity())
        assert np.allclose(q.as_array(), p.as_array())

    def test_translation_chain(self):
        q = compose(PlanarPose(1, 0, 0), PlanarPose(0, 1, 0))
        assert np.allclose(q.as_array(), [1.0, 1.0, 0.0])

    def test_rotation_apply(self):
        p = PlanarPose(0, 0, math.pi / 2)
        out = apply(p, np.array([1.0, 0.0]))
        assert np.allclose(out, [0.0, 1.0], atol=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(
        st.tuples(
            st.floats(-50, 50), st.floats(-50, 50), st.floats(-10, 10)
        ),
        st.tuples(
            st.floats(-50, 50), st.floats(-50, 50), st.floats(-10, 10)
        ),
        st.tuples(
            st.floats(-50, 50), st.floats(-50, 50), st.floats(-10, 10)
        ),
    )
    def test_group_laws(self, ta, tb, tc):
        a, b, c = (PlanarPose(*t) for t in (ta, tb, tc))
        left = compose(compose(a, b), c).as_array()
        right = compose(a, compose(b, c)).as_array()
        assert np.allclose(left[:2], right[:2], atol=1e-9)
        assert abs(wrap_angle(left[2] - right[2])) < 1e-12
        ident = compose(a, inverse(a)).as_array()
        assert np.allclose(ident, [0, 0, 0], atol=1e-12)

    def test_theta_normalized(self):
        assert PlanarPose(0, 0, 3 * math.pi).theta == pytest.approx(math.pi)
        assert PlanarPose(0, 0, -math.pi).theta == pytest.approx(math.pi)
        assert -math.pi < PlanarPose(0, 0, 123.456).theta <= math.pi
