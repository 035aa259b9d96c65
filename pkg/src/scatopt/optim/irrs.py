"""Iterative reduced random search with the stability index stopping rule."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .powell import powell_minimize
from .types import BoxDomain, MinimizeOutcome, ObjectiveHandle, SampleBatch

__all__ = ["IrrsParams", "stability_index", "irrs_minimize"]


@dataclass
class IrrsParams:
    L: int = 5000
    gamma: float = 0.01
    eta: float = 0.02
    beta: float = 1.1
    j_max: int = 30
    nu: float = 0.16
    polish: bool = True

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if not self.beta > 1:
            raise ValueError("beta must exceed 1")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.L < 1 or self.j_max < 1:
            raise ValueError("L and j_max must be positive")

    @property
    def n_keep(self) -> int:
        return max(1, int(round(self.gamma * self.L)))


def stability_index(sample: SampleBatch, metric: Optional[Callable] = None) -> float:
    """Diameter of the sample: the largest pairwise distance (0 for one point)."""
    if len(sample) == 0:
        raise ValueError("sample must be nonempty")
    pts = sample.points
    if metric is None:
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        return float(d.max())
    best = 0.0
    for i in range(len(pts)):
        for k in range(i + 1, len(pts)):
            best = max(best, float(metric(pts[i], pts[k])))
    return best


def irrs_minimize(
    obj,
    domain: BoxDomain,
    metric: Optional[Callable] = None,
    params: IrrsParams | None = None,
    seed: int = 0,
    normalization: Optional[float] = None,
    local: Optional[Callable] = None,
) -> MinimizeOutcome:
    """Reduced random search stopped by the stability index.

    Every member of each new reduced batch is first polished by ``local``
    (default: Powell with initial step ``nu``). The index is divided by
    ``normalization`` (default: the metric diameter estimate
    ``domain.diameter``) before it is compared with ``eta``.

    ``extra["verdict"]`` is ``"stable"``, ``"unstable"`` or ``"undetermined"``
    (iteration budget exhausted).
    """
    params = params or IrrsParams()
    if not isinstance(obj, ObjectiveHandle):
        obj = ObjectiveHandle(obj)
    if local is None:
        local = lambda f, x, dom: powell_minimize(f, x, dom, tol=1e-10, step=params.nu)
    norm = normalization if normalization is not None else domain.diameter
    rng = np.random.default_rng(seed)
    evals0 = obj.evals
    S: Optional[SampleBatch] = None
    trace = []
    verdict, stop = "undetermined", "budget"
    D = Dn = np.nan
    j = 0
    for j in range(1, params.j_max + 1):
        pts = domain.sample(rng, params.L)
        vals = np.array([obj(p) for p in pts])
        Hmin = SampleBatch(pts, vals).best(params.n_keep)
        if params.polish:
            polished = [local(obj, p, domain) for p in Hmin.points]
            Hmin = SampleBatch([r.best_point for r in polished], [r.best_value for r in polished])
        S = Hmin.best(params.n_keep) if S is None else S.merged(Hmin).best(params.n_keep)
        D = stability_index(S, metric)
        Dn = D / norm
        trace.append({"iteration": j, "best_value": float(S.values[0]), "stability_index": Dn, "raw_index": D})
        if Dn <= params.eta:
            verdict, stop = "stable", "stability"
            break
        if np.all(S.values <= params.beta * S.values[0]):
            verdict, stop = "unstable", "tolerance"
            break
    return MinimizeOutcome(
        S.points[0], float(S.values[0]), iterations=j, evals=obj.evals - evals0, stopped_by=stop,
        stability_index=float(Dn), seed=seed, trace=trace,
        extra={"verdict": verdict, "raw_index": float(D), "reduced_set": S},
    )
