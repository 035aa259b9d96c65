"""Identification of a circularly layered particle from multi-frequency field data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..forward.layered import layered_circle_field
from ..forward.models import LayeredFieldSamples, RadialProfile
from ..optim.lmm import ReduceParams, lmm_local, reduce_profile
from ..optim.mslm import MslmParams, mslm_minimize
from ..optim.types import BoxDomain

__all__ = ["MultiFreqTarget", "layers_objective", "invert_layers", "synthetic_target"]


@dataclass
class MultiFreqTarget:
    """Measured total fields on ``|x| = R`` for several free-space wavenumbers."""

    samples: list

    def __post_init__(self):
        if not self.samples:
            raise ValueError("at least one frequency is required")
        grid = self.samples[0].angles
        for s in self.samples:
            if not np.array_equal(s.angles, grid) or s.R != self.samples[0].R:
                raise ValueError("all frequencies must share the angle grid and radius")
            if not np.any(s.values):
                raise ValueError("data with zero norm")

    @property
    def P(self) -> int:
        return len(self.samples)

    @property
    def R(self) -> float:
        return self.samples[0].R

    @property
    def angles(self) -> np.ndarray:
        return self.samples[0].angles


def synthetic_target(profile: RadialProfile, k0s, R: float, n_angles: int = 36) -> MultiFreqTarget:
    """Noise-free data generated by the forward solver."""
    angles = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)
    return MultiFreqTarget([layered_circle_field(profile, k0, R, angles) for k0 in k0s])


def layers_objective(profile: RadialProfile, target: MultiFreqTarget) -> float:
    """``(1/P) sum_p ||w_p - g_p||^2 / ||g_p||^2`` over the angle grid."""
    total = 0.0
    for g in target.samples:
        w = layered_circle_field(profile, g.k0, g.R, g.angles).values
        total += np.sum(np.abs(w - g.values) ** 2) / np.sum(np.abs(g.values) ** 2)
    return float(total / target.P)


def invert_layers(
    target: MultiFreqTarget,
    domain: BoxDomain,
    params: MslmParams | None = None,
    seed: int = 0,
    reduce_params: ReduceParams | None = None,
):
    """MSLM over ``(r_1..r_M, n_1..n_M)`` with LMM local searches.

    Returns ``(RadialProfile, MinimizeOutcome)``; the profile is reduced, so
    it may carry fewer layers than the domain allows.
    """
    params = params or MslmParams()
    rp = reduce_params or ReduceParams(eps_r=0.02, background=1.0)
    R = float(domain.upper[0])

    def prof(v):
        return RadialProfile.from_vector(v, R, 1.0)

    obj = lambda v: layers_objective(prof(v), target)
    local = lambda f, x, dom: lmm_local(f, x, dom, rp)
    out = mslm_minimize(obj, domain, params, local, seed)
    best = reduce_profile(out.best_point, R, 1e-12, 1e-9)
    return prof(best), out
