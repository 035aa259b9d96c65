"""Objective functions and inversion drivers for the three inverse problems."""

from .layers import MultiFreqTarget, invert_layers, layers_objective, synthetic_target
from .potential import (
    PotentialTarget,
    admissible_diameter,
    invert_potential,
    potential_distance,
    potential_objective,
)
from .subsurface import SubsurfaceProblem, invert_subsurface, tilde_phi

__all__ = [
    "MultiFreqTarget",
    "invert_layers",
    "layers_objective",
    "synthetic_target",
    "PotentialTarget",
    "admissible_diameter",
    "invert_potential",
    "potential_distance",
    "potential_objective",
    "SubsurfaceProblem",
    "invert_subsurface",
    "tilde_phi",
]
