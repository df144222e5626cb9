"""Calibration: dataset construction, training, inference, sphere correction."""

import math

import numpy as np
import pytest

from gelsphere.calib import (
    CalibrationDataset,
    DatasetTooSmall,
    GradientModel,
    IndentationRecording,
    LabelOutsideImage,
    RadiusInconsistent,
    TrainConfig,
    build_dataset,
    correct_for_sphere,
    flatten_from_sphere,
    infer_normals,
    simulate_indentation,
    sphere_ground_truth_gradients,
    train,
)
from gelsphere.core import (
    ContactMask,
    SensorGeometry,
    TactileFrame,
    estimate_contact_mask,
    flat_normal_map,
    gradients_to_normals,
    integrate_poisson,
)
from gelsphere.sim import SPECULAR_COATING, hex_scene, render, render_background
from gelsphere.sim import contact_patch
from gelsphere.core import PlanarPose


class TestSphereGroundTruth:
    def test_apex_gradient_zero(self):
        g = sphere_ground_truth_gradients((120.0, 120.0), 16.0, 3.0, 0.125)
        assert g.gx[120, 120] == 0.0 and g.gy[120, 120] == 0.0

    def test_45_degree_ring(self):
        # at rho = R/sqrt(2) the slope magnitude is exactly 1
        pitch = 0.125
        R = 3.0
        rho = R / math.sqrt(2.0)
        px = 120.0 + rho / pitch
        g = sphere_ground_truth_gradients((120.0, 120.0), rho / pitch + 1.0, R, pitch)
        mag = math.hypot(g.gx[120, int(round(px))], g.gy[120, int(round(px))])
        # nearest pixel sits within half a pixel of the exact ring
        assert mag == pytest.approx(1.0, abs=0.02)
        # exact value at the exact radius by formula
        assert rho / math.sqrt(R**2 - rho**2) == pytest.approx(1.0, abs=1e-9)

    def test_integrates_to_cap_depth(self):
        pitch = 0.125
        R, rc_px = 3.0, 14.0
        rc = rc_px * pitch
        g = sphere_ground_truth_gradients((120.0, 120.0), rc_px, R, pitch)
        mask = ContactMask(center=(120.0, 120.0), radius=rc_px, shape=(240, 240))
        hm = integrate_poisson(g, mask, pitch)
        expected = R - math.sqrt(R**2 - rc**2)
        assert hm.h.max() == pytest.approx(expected, rel=0.02)

    def test_radius_inconsistent(self):
        with pytest.raises(RadiusInconsistent):
            sphere_ground_truth_gradients((120, 120), 100.0, 3.0, 0.125)


class TestBuildDataset:
    def test_empty_recordings(self, geom):
        ds = build_dataset([], geom)
        assert len(ds) == 0

    def test_sample_counting(self, geom):
        rec = simulate_indentation(3.0, (0.0, 0.0), 5.0, SPECULAR_COATING, geom, noise_sigma=0.0)
        ds = build_dataset([rec], geom)
        g = sphere_ground_truth_gradients(
            rec.circle_center_px, rec.circle_radius_px, 3.0, geom.pixel_pitch
        )
        assert len(ds) == g.valid_mask.sum()

    def test_label_outside_image(self, geom):
        rec = simulate_indentation(3.0, (0.0, 0.0), 5.0, SPECULAR_COATING, geom, noise_sigma=0.0)
        bad = IndentationRecording(
            frame=rec.frame,
            background=rec.background,
            circle_center_px=(9999.0, 10.0),
            circle_radius_px=10.0,
            sphere_radius_mm=3.0,
        )
        with pytest.raises(LabelOutsideImage):
            build_dataset([bad], geom)

    def test_targets_bounded_by_label_slope(self, geom, specular_dataset):
        # the steepest possible target is the cap slope at the labeled radius
        assert len(specular_dataset) >= 10_000
        assert np.abs(specular_dataset.targets).max() <= 2.0

    def test_dataset_file_round_trip(self, tmp_path, geom):
        rec = simulate_indentation(3.5, (2.0, 1.0), 5.0, SPECULAR_COATING, geom, noise_sigma=0.0)
        ds = build_dataset([rec], geom)
        p = tmp_path / "calib.gscd"
        ds.save(p)
        back = CalibrationDataset.load(p)
        assert (back.inputs == ds.inputs).all()
        assert (back.targets == ds.targets).all()


def linear_shading_dataset(n=30_000, seed=0):
    """Noiseless synthetic samples where intensity is linear in the slope."""
    rng = np.random.default_rng(seed)
    g = rng.uniform(-1.2, 1.2, size=(n, 2))
    pos = rng.uniform(0.0, 1.0, size=(n, 2))
    gain = 0.5 + 0.4 * pos[:, :1]  # position-dependent illumination
    drgb = np.stack(
        [
            gain[:, 0] * (0.5 * g[:, 0] + 0.2 * g[:, 1]),
            gain[:, 0] * (-0.4 * g[:, 0] + 0.3 * g[:, 1]),
            gain[:, 0] * (0.1 * g[:, 0] - 0.5 * g[:, 1]),
        ],
        axis=1,
    )
    return CalibrationDataset(drgb.astype(np.float32), pos.astype(np.float32), g.astype(np.float32))


class TestTraining:
    def test_linear_synthetic_oracle(self):
        ds = linear_shading_dataset()
        model = train(ds, TrainConfig(epochs=80, seed=0))
        assert model.val_rmse < 0.02

    def test_dataset_too_small(self):
        ds = linear_shading_dataset(n=500)
        with pytest.raises(DatasetTooSmall):
            train(ds)

    def test_duplicated_dataset_equivalent_model(self):
        ds = linear_shading_dataset(n=15_000)
        dup = CalibrationDataset(
            np.concatenate([ds.delta_rgb, ds.delta_rgb]),
            np.concatenate([ds.pixel_xy, ds.pixel_xy]),
            np.concatenate([ds.targets, ds.targets]),
        )
        cfg = TrainConfig(epochs=40, seed=0)
        m1 = train(ds, cfg)
        m2 = train(dup, cfg)
        probe = linear_shading_dataset(n=2_000, seed=9).inputs.astype(np.float64)
        d = np.abs(m1.predict(probe) - m2.predict(probe))
        assert d.mean() < 0.02

    def test_training_determinism_bytes(self, tmp_path):
        ds = linear_shading_dataset(n=12_000)
        cfg = TrainConfig(epochs=15, seed=7)
        p1, p2 = tmp_path / "a.gsmd", tmp_path / "b.gsmd"
        train(ds, cfg).save(p1)
        train(ds, cfg).save(p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_model_file_round_trip(self, tmp_path):
        ds = linear_shading_dataset(n=12_000)
        model = train(ds, TrainConfig(epochs=10, seed=1))
        p = tmp_path / "m.gsmd"
        model.save(p)
        back = GradientModel.load(p)
        probe = ds.inputs[:100].astype(np.float64)
        assert np.allclose(model.predict(probe), back.predict(probe), atol=1e-6)
        p2 = tmp_path / "m2.gsmd"
        back.save(p2)
        assert p.read_bytes() == p2.read_bytes()

    def test_more_data_does_not_hurt(self):
        # statistical guard on the noiseless linear task
        cfg = TrainConfig(epochs=30, seed=3)
        m_small = train(linear_shading_dataset(n=12_000, seed=4), cfg)
        m_big = train(linear_shading_dataset(n=24_000, seed=4), cfg)
        assert m_big.val_rmse <= m_small.val_rmse * 1.10


class TestInference:
    def test_background_gives_flat_normals(self, geom, specular_model):
        # frame == background -> NoContact mask -> flat normals everywhere
        bg = render_background(SPECULAR_COATING, geom=geom)
        mask = estimate_contact_mask(bg, bg)
        assert mask.empty
        nm = infer_normals(bg, bg, specular_model, mask)
        assert (nm.n[..., 2] == 1.0).all()

    def test_held_out_indentation_dot(self, geom, specular_model):
        rec = simulate_indentation(
            3.5, (4.3, -2.1), 5.0, SPECULAR_COATING, geom, rng=np.random.default_rng(99)
        )
        gt = gradients_to_normals(
            sphere_ground_truth_gradients(
                rec.circle_center_px, rec.circle_radius_px, 3.5, geom.pixel_pitch
            )
        )
        mask = estimate_contact_mask(rec.frame, rec.background)
        est = infer_normals(rec.frame, rec.background, specular_model, mask)
        sel = gt.valid_mask & mask.raster
        dot = (est.n[sel] * gt.n[sel]).sum(axis=1)
        assert dot.mean() >= 0.97

    def test_hex_facets_consistent(self, geom, specular_model):
        scene = hex_scene()
        hm, mask, nm = contact_patch(scene, PlanarPose(), 10.0, geom)
        frame = render(hm, mask, SPECULAR_COATING, noise_sigma=2 / 255, geom=geom,
                       normals=nm, rng=np.random.default_rng(5))
        bg = render_background(SPECULAR_COATING, geom=geom)
        est = infer_normals(frame, bg, specular_model, estimate_contact_mask(frame, bg))
        # sample the facet along +x, away from edges
        cy, cx = int(geom.optical_center[1]), int(geom.optical_center[0])
        patch = est.n[cy - 3 : cy + 4, cx + 8 : cx + 18].reshape(-1, 3)
        mean = patch.mean(axis=0)
        mean /= np.linalg.norm(mean)
        ang = np.degrees(np.arccos(np.clip(patch @ mean, -1, 1)))
        assert ang.std() < 3.0


class TestSphereCorrection:
    def test_flat_at_center_maps_to_up(self, geom):
        nm = flat_normal_map((geom.height, geom.width))
        out = correct_for_sphere(nm, geom)
        cy, cx = int(geom.optical_center[1]), int(geom.optical_center[0])
        # nearest pixel sits half a pitch off the exact apex
        assert out.n[cy, cx][2] > 1.0 - 5e-6

    def test_flat_field_maps_to_base_sphere(self, geom):
        nm = flat_normal_map((geom.height, geom.width))
        out = correct_for_sphere(nm, geom)
        base = geom.rest_sphere_normals()
        assert np.abs(out.n - base.n).max() < 1e-9

    def test_round_trip(self, geom, rng):
        n = rng.normal(size=(geom.height, geom.width, 3))
        n[..., 2] = np.abs(n[..., 2]) + 1.0
        n /= np.linalg.norm(n, axis=-1, keepdims=True)
        from gelsphere.core import NormalMap

        nm = NormalMap(n=n, valid_mask=np.ones((geom.height, geom.width), bool))
        back = flatten_from_sphere(correct_for_sphere(nm, geom), geom)
        sel = back.valid_mask
        assert np.abs(back.n[sel] - nm.n[sel]).max() < 1e-9

    def test_preserves_same_pixel_angles(self, geom, rng):
        from gelsphere.core import NormalMap

        def rand_map():
            n = rng.normal(size=(geom.height, geom.width, 3))
            n[..., 2] = np.abs(n[..., 2]) + 1.0
            n /= np.linalg.norm(n, axis=-1, keepdims=True)
            return NormalMap(n=n, valid_mask=np.ones((geom.height, geom.width), bool))

        a, b = rand_map(), rand_map()
        dots_before = (a.n * b.n).sum(axis=-1)
        ca = correct_for_sphere(a, geom)
        cb = correct_for_sphere(b, geom)
        dots_after = (ca.n * cb.n).sum(axis=-1)
        assert np.abs(dots_after - dots_before).max() < 1e-9
