"""Foundational data types and geometry math shared by all modules."""

from .contact import estimate_contact_mask, frame_energy
from .convert import (
    finite_difference_gradient,
    gradients_to_normals,
    normals_to_gradients,
)
from .poisson import integrate_poisson
from .se2 import apply, compose, inverse, relative
from .types import (
    ContactMask,
    EmptyMask,
    GelsphereError,
    GradientField,
    HeightMap,
    NonFiniteGradient,
    NormalMap,
    PlanarPose,
    SensorGeometry,
    TactileFrame,
    flat_normal_map,
    wrap_angle,
)

__all__ = [
    "ContactMask",
    "EmptyMask",
    "GelsphereError",
    "GradientField",
    "HeightMap",
    "NonFiniteGradient",
    "NormalMap",
    "PlanarPose",
    "SensorGeometry",
    "TactileFrame",
    "apply",
    "compose",
    "estimate_contact_mask",
    "finite_difference_gradient",
    "flat_normal_map",
    "frame_energy",
    "gradients_to_normals",
    "integrate_poisson",
    "inverse",
    "normals_to_gradients",
    "relative",
    "wrap_angle",
]
