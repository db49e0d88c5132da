"""Synthetic endotracheal-tube overlays for chest radiographs."""

from .compositor import SyntheticCase, TubeOverlay, blend, derive_mask, stamp_tube
from .dataset import (
    CaseRecord,
    GenerationConfig,
    ManifestEntry,
    generate_dataset,
    read_manifest,
    render_case,
    select_cases,
)
from .errors import (
    EmptySupportError,
    LandmarkExtractionError,
    OutOfBoundsError,
    SchemaError,
    ShortfallError,
    TubeSynthError,
    ValidationError,
)
from .landmarks import ClavicleLandmarks, ClavicleMask, extract_landmarks
from .trajectory import TrajectoryCurve, TrajectoryParams, interpolate_bspline, sample_control_points
from .tube_profile import (
    DEFAULT_ANGLES,
    ProjectionProfile,
    TubeCrossSection,
    radon_project,
    rasterize_cross_section,
    sample_profile,
    tube_profiles,
)

__version__ = "0.1.0"
