"""Multilevel single-linkage multistart minimization.

Each iteration adds a batch of uniform samples, keeps the best fraction, and
starts a local search from a retained point only when no better retained
point lies within the critical distance ``d_j``. The run stops once the
Bayesian estimate of the total number of minima,
``W_tot = W (K - 1) / (K - W - 2)``, is below ``W + 0.5``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .types import BoxDomain, MinimizeOutcome, ObjectiveHandle, SampleBatch

__all__ = ["MslmParams", "critical_distance", "expected_minima", "mslm_minimize"]


@dataclass
class MslmParams:
    L: int = 100
    gamma: float = 0.1
    sigma: float = 4.0
    max_iter: int = 15

    def __post_init__(self):
        if self.L < 10:
            raise ValueError("L must be at least 10")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


def _ball_radius(extent: float, dim: int, sigma: float, n: int) -> float:
    return math.pi ** -0.5 * (math.gamma(1 + dim / 2) * extent**dim * sigma * math.log(n) / n) ** (1.0 / dim)


def critical_distance(domain: BoxDomain, j: int, L: int, sigma: float) -> float:
    """Critical distance ``d_j`` after ``j`` batches of ``L`` points.

    For layered domains (ordered radii) the radius and value blocks each
    contribute a term with their own extent and the layer count as
    dimension; otherwise a single term uses the box volume.
    """
    n = j * L
    if domain.radius_slice is not None:
        m = domain.dim // 2
        R = float(np.max(domain.upper[:m]))
        span = float(np.max(domain.width[m:]))
        d_r = _ball_radius(R, m, sigma, n)
        d_n = _ball_radius(span, m, sigma, n)
        return math.hypot(d_r, d_n)
    free = domain.width[domain.width > 0]
    dim = free.size
    vol = float(np.prod(free))
    return math.pi ** -0.5 * (math.gamma(1 + dim / 2) * vol * sigma * math.log(n) / n) ** (1.0 / dim)


def expected_minima(W: int, K: int) -> Optional[float]:
    """``W (K - 1) / (K - W - 2)``, or ``None`` while ``K < W + 3``."""
    if K < W + 3:
        return None
    return W * (K - 1) / (K - W - 2)


def mslm_minimize(
    obj,
    domain: BoxDomain,
    params: MslmParams,
    local: Callable,
    seed: int = 0,
    metric: Optional[Callable] = None,
) -> MinimizeOutcome:
    """Global minimization by multilevel single linkage.

    Parameters
    ----------
    local : callable
        ``local(obj, start, domain) -> MinimizeOutcome``.
    metric : callable, optional
        Distance between two local minimizers used to decide whether a new
        minimum is already known (default: Euclidean). Minimizers closer than
        ``d_j`` are the same minimum.

    ``extra["minima"]`` lists ``(point, value)`` of the distinct minima found.
    """
    if not isinstance(obj, ObjectiveHandle):
        obj = ObjectiveHandle(obj)
    metric = metric or (lambda a, b: float(np.linalg.norm(a - b)))
    rng = np.random.default_rng(seed)
    evals0 = obj.evals
    H = SampleBatch(np.zeros((0, domain.dim)), np.zeros(0))
    started = np.zeros(0, dtype=bool)
    minima: list[tuple[np.ndarray, float]] = []
    K = 0
    trace = []
    stop = "budget"
    j = 0
    for j in range(1, params.max_iter + 1):
        pts = domain.sample(rng, params.L)
        vals = np.array([obj(p) for p in pts])
        H = H.merged(SampleBatch(pts, vals))
        started = np.r_[started, np.zeros(params.L, dtype=bool)]
        n_red = max(1, int(round(params.gamma * j * params.L)))
        order = np.argsort(H.values, kind="stable")[:n_red]
        d_j = critical_distance(domain, j, params.L, params.sigma)
        red_pts = H.points[order]
        for pos, idx in enumerate(order):
            if started[idx]:
                continue
            if pos and np.any(np.linalg.norm(red_pts[:pos] - red_pts[pos], axis=1) <= d_j):
                continue
            started[idx] = True
            res = local(obj, H.points[idx], domain)
            K += 1
            if not any(metric(res.best_point, m[0]) < d_j for m in minima):
                minima.append((res.best_point, res.best_value))
            else:
                # keep the better representative of a known minimum
                k = min(range(len(minima)), key=lambda i: metric(res.best_point, minima[i][0]))
                if res.best_value < minima[k][1]:
                    minima[k] = (res.best_point, res.best_value)
        W = len(minima)
        w_tot = expected_minima(W, K)
        best_val = min([m[1] for m in minima], default=float(H.values.min()))
        trace.append({"iteration": j, "best_value": best_val, "K": K, "W": W, "d_j": d_j, "W_tot": w_tot})
        if w_tot is not None and w_tot < W + 0.5:
            stop = "confidence"
            break
    if minima:
        bp, bv = min(minima, key=lambda m: m[1])
    else:
        i = int(np.argmin(H.values))
        bp, bv = H.points[i], float(H.values[i])
    minima.sort(key=lambda m: m[1])
    return MinimizeOutcome(
        bp, bv, iterations=j, evals=obj.evals - evals0, stopped_by=stop, seed=seed, trace=trace,
        extra={"minima": minima, "K": K, "W": len(minima)},
    )
