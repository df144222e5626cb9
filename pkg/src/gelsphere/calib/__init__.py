"""Photometric-stereo calibration: dataset, regressor, inference, correction."""

from .dataset import (
    MAX_SLOPE,
    CalibrationDataset,
    CalibrationSample,
    IndentationRecording,
    LabelOutsideImage,
    MissingBackground,
    RadiusInconsistent,
    build_dataset,
    press_locations,
    sphere_ground_truth_gradients,
)
from .infer import correct_for_sphere, flatten_from_sphere, infer_normals
from .model import (
    DatasetTooSmall,
    Diverged,
    GradientModel,
    ModelNotTrained,
    TrainConfig,
    train,
)
from .simulate import (
    CALIB_FORCES_N,
    CALIB_LOCATIONS,
    CALIB_RADII_MM,
    simulate_calibration_recordings,
    simulate_indentation,
)

__all__ = [
    "CALIB_FORCES_N",
    "CALIB_LOCATIONS",
    "CALIB_RADII_MM",
    "CalibrationDataset",
    "CalibrationSample",
    "DatasetTooSmall",
    "Diverged",
    "GradientModel",
    "IndentationRecording",
    "LabelOutsideImage",
    "MAX_SLOPE",
    "MissingBackground",
    "ModelNotTrained",
    "RadiusInconsistent",
    "TrainConfig",
    "build_dataset",
    "correct_for_sphere",
    "flatten_from_sphere",
    "infer_normals",
    "press_locations",
    "simulate_calibration_recordings",
    "simulate_indentation",
    "sphere_ground_truth_gradients",
    "train",
]
