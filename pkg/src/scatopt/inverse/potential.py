"""Recovery of a spherically symmetric potential from fixed-energy phase shifts."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..forward.models import PhaseShiftSet, RadialProfile
from ..forward.phase import phase_shifts
from ..optim.irrs import IrrsParams, irrs_minimize
from ..optim.lmm import ReduceParams, lmm_local, reduce_profile
from ..optim.types import BoxDomain, MinimizeOutcome

__all__ = [
    "PotentialTarget",
    "potential_objective",
    "potential_distance",
    "admissible_diameter",
    "invert_potential",
]


@dataclass
class PotentialTarget:
    k: float
    target_shifts: PhaseShiftSet
    N: int = 31

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be at least 1")
        if self.target_shifts.l_max < self.N:
            raise ValueError("target must contain shifts up to l = N")
        tail = self.target_shifts.shifts[1 : self.N + 1]
        self._norm = float(np.sum(tail**2))
        if self._norm == 0:
            raise ValueError("target shifts l = 1..N are all zero")


def _wrap(x):
    # phase shifts are defined modulo pi
    return (x + np.pi / 2) % np.pi - np.pi / 2


def potential_objective(profile: RadialProfile, target: PotentialTarget) -> float:
    """``sum_{l=1}^N |delta_l - delta~_l|^2 / sum_{l=1}^N |delta~_l|^2``."""
    d = phase_shifts(profile, target.k, target.N).shifts[1 : target.N + 1]
    t = target.target_shifts.shifts[1 : target.N + 1]
    return float(np.sum(_wrap(d - t) ** 2) / target._norm)


def potential_distance(p1: RadialProfile, p2: RadialProfile) -> float:
    """L2 distance in R^3 between two radial potentials, integrated exactly."""
    edges = np.unique(np.r_[0.0, p1.breakpoints, p2.breakpoints])
    if edges.size < 2:
        return 0.0
    a, b = edges[:-1], edges[1:]
    mid = 0.5 * (a + b)
    diff = p1(mid) - p2(mid)
    vol = 4.0 * math.pi / 3.0 * (b**3 - a**3)
    return float(math.sqrt(np.sum(diff**2 * vol)))


def admissible_diameter(R: float, q_low: float, q_high: float) -> float:
    """Largest distance between two admissible potentials on ``[0, R]``."""
    return (q_high - q_low) * math.sqrt(4.0 * math.pi / 3.0 * R**3)


def invert_potential(
    target: PotentialTarget,
    domain: BoxDomain,
    params: IrrsParams | None = None,
    seed: int = 0,
    eps_r: float = 0.1,
):
    """IRRS over ``(r_1..r_M, q_1..q_M)`` with LMM polishing.

    Returns ``(RadialProfile, MinimizeOutcome)``; the outcome's
    ``stability_index`` is normalized by the admissible-set diameter.
    """
    params = params or IrrsParams()
    m = domain.dim // 2
    R = float(domain.upper[0])
    q_low, q_high = float(domain.lower[m]), float(domain.upper[m])

    def prof(v):
        return RadialProfile.from_vector(v, R, 0.0)

    obj = lambda v: potential_objective(prof(v), target)
    metric = lambda a, b: potential_distance(prof(a), prof(b))
    rp = ReduceParams(eps_r=eps_r, background=0.0)
    local = lambda f, x, dom: lmm_local(f, x, dom, rp, step=params.nu)
    out = irrs_minimize(obj, domain, metric, params, seed, admissible_diameter(R, q_low, q_high), local)
    # drop only the padding layers and exact duplicates
    best = reduce_profile(out.best_point, R, 1e-12, 1e-9)
    return prof(best), out
