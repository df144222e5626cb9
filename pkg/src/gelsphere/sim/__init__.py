"""Virtual sensor: scenes, contact geometry, rendering, trajectory playback.

Serves as the independent oracle for the reconstruction engine: every frame
comes with exact poses, contact circles, normals, and heights.
"""

from .contact import (
    HERTZ_C,
    contact_patch,
    flat_contact_radius,
    hertz_depth,
    hertz_force,
)
from .render import (
    DEFAULT_LIGHTS,
    DEFAULT_NOISE_SIGMA,
    MATTE_COATING,
    SPECULAR_COATING,
    CoatingModel,
    Illumination,
    coating_by_name,
    hex_pyramid_reference,
    render,
    render_background,
    unbalanced_lights,
)
from .scan import (
    ScanGroundTruth,
    ScanResult,
    Trajectory,
    load_trajectory,
    save_trajectory,
    serpentine_path,
    simulate_scan,
    square_path,
    straight_roll,
)
from .scene import (
    HexPyramid,
    OutOfBounds,
    Ridge,
    Scene,
    SphereIndenter,
    feather_scene,
    flat_scene,
    hex_scene,
    load_scene,
    save_scene,
    sphere_scene,
)

__all__ = [
    "HERTZ_C",
    "CoatingModel",
    "DEFAULT_LIGHTS",
    "DEFAULT_NOISE_SIGMA",
    "HexPyramid",
    "Illumination",
    "MATTE_COATING",
    "OutOfBounds",
    "Ridge",
    "SPECULAR_COATING",
    "ScanGroundTruth",
    "ScanResult",
    "Scene",
    "SphereIndenter",
    "Trajectory",
    "coating_by_name",
    "contact_patch",
    "feather_scene",
    "flat_contact_radius",
    "flat_scene",
    "hertz_depth",
    "hertz_force",
    "hex_pyramid_reference",
    "hex_scene",
    "load_scene",
    "load_trajectory",
    "render",
    "render_background",
    "save_scene",
    "save_trajectory",
    "serpentine_path",
    "simulate_scan",
    "sphere_scene",
    "square_path",
    "straight_roll",
    "unbalanced_lights",
]
