"""Forward models and synthetic-data generators."""

from .circle import circle_amplitude, circle_mode_ratios
from .layered import layered_circle_field, mode_coefficients, scattering_matrix
from .models import (
    InclusionSet,
    LayeredFieldSamples,
    PhaseShiftSet,
    RadialProfile,
    SourceDetectorPairs,
    SubsurfaceData,
    load_json,
    save_json,
)
from .phase import WELLS, noisy_shifts, phase_shifts, well
from .subsurface import (
    EXPERIMENT_BOX,
    TABLE_INCLUSIONS,
    experiment1_pairs,
    experiment2_pairs,
    helmholtz_green,
    multiplicative_noise,
    pair_green,
    subsurface_data,
)

__all__ = [
    "circle_amplitude",
    "circle_mode_ratios",
    "layered_circle_field",
    "mode_coefficients",
    "scattering_matrix",
    "InclusionSet",
    "LayeredFieldSamples",
    "PhaseShiftSet",
    "RadialProfile",
    "SourceDetectorPairs",
    "SubsurfaceData",
    "load_json",
    "save_json",
    "noisy_shifts",
    "phase_shifts",
    "WELLS",
    "well",
    "EXPERIMENT_BOX",
    "TABLE_INCLUSIONS",
    "experiment1_pairs",
    "experiment2_pairs",
    "helmholtz_green",
    "multiplicative_noise",
    "pair_green",
    "subsurface_data",
]
