"""Hybrid Stochastic-Deterministic search for point configurations.

The objective is a *fit* callable mapping an ``(N, 3)`` array of positions to
``(value, intensities)``; the intensities are the best-fit (clamped) values
for those positions. Random configurations are screened, weak points dropped,
close points merged, and the survivors polished with Powell's method.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Callable

import numpy as np

from .powell import powell_minimize
from .types import BoxDomain, MinimizeOutcome, ObjectiveHandle

__all__ = ["HsdParams", "hsd_minimize", "merge_close_points"]


@dataclass
class HsdParams:
    M: int = 16
    P0: float = 1.0
    T_max: int = 1000
    n_max: int = 6
    eps_s: float = 0.5
    eps_i: float = 0.25
    eps_d: float = 0.1
    eps: float = 1e-5
    v_max: float = 2.0
    powell_tol: float = 1e-12
    stop_at_eps: bool = True

    def __post_init__(self):
        for name in ("P0", "eps_s", "eps_i", "eps_d", "eps", "v_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.M < 1 or self.T_max < 1 or self.n_max < 1:
            raise ValueError("M, T_max and n_max must be positive integers")

    def to_dict(self) -> dict:
        return asdict(self)


def merge_close_points(z: np.ndarray, v: np.ndarray, min_dist: float):
    """Merge pairs closer than ``min_dist`` until none remain.

    The weaker point of a pair is removed and its intensity added to the
    stronger one. Pairs are processed closest first, so the result does not
    depend on the input order.
    """
    z, v = np.array(z, dtype=float).reshape(-1, 3), np.array(v, dtype=float)
    while len(v) > 1:
        d = np.linalg.norm(z[:, None, :] - z[None, :, :], axis=-1)
        d[np.diag_indices(len(v))] = np.inf
        i, j = np.unravel_index(np.argmin(d), d.shape)
        if d[i, j] >= min_dist:
            break
        keep, drop = (i, j) if v[i] >= v[j] else (j, i)
        v[keep] += v[drop]
        z, v = np.delete(z, drop, axis=0), np.delete(v, drop)
    return z, v


def hsd_minimize(
    fit: Callable[[np.ndarray], tuple],
    box: BoxDomain,
    params: HsdParams,
    seed: int = 0,
) -> MinimizeOutcome:
    """Global minimization of ``fit`` over configurations of points in ``box``.

    Returns the best configuration over all repetitions. ``best_point`` holds
    the flattened positions; ``extra["z"]`` and ``extra["v"]`` the recovered
    positions and intensities.
    """
    if box.dim != 3:
        raise ValueError("HSD expects a 3D box for single points")
    rng = np.random.default_rng(seed)
    counter = ObjectiveHandle(lambda x: fit(x.reshape(-1, 3))[0])
    diam = box.diameter
    best = None
    trace = []
    total_tries = 0
    stop = "budget"

    for rep in range(params.n_max):
        P0 = params.P0
        kept = np.zeros((0, 3))
        tries = 0
        rep_best = None
        while tries < params.T_max:
            # step 1: complete to M points and screen
            accepted = False
            while tries < params.T_max:
                tries += 1
                Z = np.vstack([kept, box.sample(rng, params.M - len(kept))])
                Ps, v = fit(Z)
                counter.evals += 1
                if Ps < P0 * params.eps_s:
                    accepted = True
                    break
            if not accepted:
                break
            # step 2: drop weak points
            strong = v >= params.v_max * params.eps_i
            Z, v = Z[strong], v[strong]
            # step 3: merge close points
            Z, v = merge_close_points(Z, v, params.eps_d * diam)
            # step 4: deterministic polish in 3N variables
            if len(Z):
                dom = BoxDomain.tiled(box.lower, box.upper, len(Z))
                res = powell_minimize(counter, Z.ravel(), dom, tol=params.powell_tol)
                Z = res.best_point.reshape(-1, 3)
            P, v = fit(Z)
            trace.append({"iteration": len(trace) + 1, "best_value": P, "repetition": rep, "N": len(Z), "tries": tries})
            if rep_best is None or P < rep_best[0]:
                rep_best = (P, Z.copy(), np.asarray(v, float).copy())
            if P < params.eps:
                break
            P0 = P
            # step 5: keep the polished points and go back to step 1
            kept = Z
        total_tries += tries
        if rep_best is not None and (best is None or rep_best[0] < best[0]):
            best = rep_best
        if best is not None and best[0] < params.eps:
            stop = "tolerance"
            if params.stop_at_eps:
                break

    if best is None:
        empty = np.zeros((0, 3))
        val, v = fit(empty)
        best = (val, empty, np.asarray(v, float))
    val, Z, v = best
    return MinimizeOutcome(
        Z.ravel(),
        float(val),
        iterations=len(trace),
        evals=counter.evals,
        stopped_by=stop,
        seed=seed,
        trace=trace,
        extra={"z": Z, "v": v, "random_tries": total_tries},
    )
