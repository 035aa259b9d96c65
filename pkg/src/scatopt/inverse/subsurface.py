"""Recovery of small subsurface inclusions from surface source/detector data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..forward.models import InclusionSet, SubsurfaceData
from ..forward.subsurface import EXPERIMENT_BOX, pair_green
from ..optim.hsd import HsdParams, hsd_minimize
from ..optim.types import BoxDomain, MinimizeOutcome

__all__ = ["SubsurfaceProblem", "tilde_phi", "invert_subsurface"]

_RIDGE = 1e-12


@dataclass
class SubsurfaceProblem:
    data: SubsurfaceData
    box: BoxDomain
    v_max: float = 2.0

    def __post_init__(self):
        if not self.v_max > 0:
            raise ValueError("v_max must be positive")

    @classmethod
    def experiment(cls, data: SubsurfaceData, v_max: float = 2.0) -> "SubsurfaceProblem":
        return cls(data, BoxDomain(*EXPERIMENT_BOX), v_max)


def tilde_phi(z, problem: SubsurfaceProblem):
    """Misfit after fitting intensities for fixed positions ``z``.

    Intensities solve the real-stacked least-squares problem through its normal
    equations and are then clamped to ``[0, v_max]``.

    Returns
    -------
    value : float
        ``sum_j |f_j - sum_m G_j(z_m) v_m|^2`` at the clamped intensities.
    v : ndarray
    """
    z = np.asarray(z, dtype=float).reshape(-1, 3)
    f = problem.data.f
    if len(z) == 0:
        return float(np.sum(np.abs(f) ** 2)), np.zeros(0)
    G = pair_green(problem.data.pairs, z)
    A = np.vstack([G.real, G.imag])
    b = np.r_[f.real, f.imag]
    AtA = A.T @ A
    ridge = _RIDGE * max(float(np.max(np.diag(AtA))), 1e-300)
    v = np.linalg.solve(AtA + ridge * np.eye(len(z)), A.T @ b)
    v = np.clip(v, 0.0, problem.v_max)
    r = f - G @ v
    return float(np.vdot(r, r).real), v


def invert_subsurface(problem: SubsurfaceProblem, params: HsdParams | None = None, seed: int = 0, restarts: int = 0):
    """Run HSD on ``problem``; returns ``(InclusionSet, MinimizeOutcome)``.

    With ``restarts > 0`` a run that misses ``params.eps`` is repeated with
    seeds ``seed + 1, seed + 2, ...`` and the best result is kept.
    """
    params = params or HsdParams(v_max=problem.v_max)
    fit = lambda Z: tilde_phi(Z, problem)
    best: MinimizeOutcome | None = None
    for attempt in range(restarts + 1):
        out = hsd_minimize(fit, problem.box, params, seed + attempt)
        out.extra["attempt"] = attempt
        if best is None or out.best_value < best.best_value:
            best = out
        if best.best_value < params.eps:
            break
    incl = InclusionSet(best.extra["z"], best.extra["v"]).sorted_by_intensity()
    return incl, best
