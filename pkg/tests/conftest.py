"""Shared heavyweight fixtures: trained models are session-scoped."""

from __future__ import annotations

import numpy as np
import pytest

from gelsphere.calib import (
    TrainConfig,
    build_dataset,
    simulate_calibration_recordings,
    train,
)
from gelsphere.core import SensorGeometry
from gelsphere.sim import MATTE_COATING, SPECULAR_COATING


@pytest.fixture(scope="session")
def geom():
    return SensorGeometry()


@pytest.fixture(scope="session")
def specular_dataset(geom):
    recs = simulate_calibration_recordings(SPECULAR_COATING, geom, seed=0)
    return build_dataset(recs, geom, seed=0)


@pytest.fixture(scope="session")
def matte_dataset(geom):
    recs = simulate_calibration_recordings(MATTE_COATING, geom, seed=0)
    return build_dataset(recs, geom, seed=0)


@pytest.fixture(scope="session")
def specular_model(specular_dataset):
    return train(specular_dataset, TrainConfig(epochs=120, seed=0))


@pytest.fixture(scope="session")
def matte_model(matte_dataset):
    return train(matte_dataset, TrainConfig(epochs=120, seed=0))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260810)
