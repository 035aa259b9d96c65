"""Local minimization of layered profiles with layer reduction.

Profiles use the layout ``(r_1..r_M, c_1..c_M)``: ``c_m`` holds on
``r_{m-1} <= r < r_m``. The reduction removes layers that are too thin or
indistinguishable from a neighbour, which lets Powell's method work in a
smaller space. Reduced profiles are padded back to ``M`` layers with
zero-width layers at the centre, which leaves the profile unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .powell import powell_minimize
from .types import BoxDomain, MinimizeOutcome, ObjectiveHandle

__all__ = ["ReduceParams", "reduce_profile", "pad_profile", "lmm_local"]


@dataclass
class ReduceParams:
    """Reduction thresholds.

    ``eps_r`` is a width relative to the outer radius; ``eps_n`` an absolute
    difference of layer values (default: 1% of the admissible value range).
    """

    eps_r: float = 0.1
    eps_n: Optional[float] = None
    background: Optional[float] = None


def _split(vec):
    vec = np.asarray(vec, dtype=float)
    m = vec.size // 2
    order = np.argsort(vec[:m], kind="stable")
    return vec[:m][order], vec[m:][order]


def reduce_profile(vec, R: float, eps_r: float, eps_n: float, background: Optional[float] = None) -> np.ndarray:
    """Apply the reduction rules until nothing changes.

    1. An outermost layer whose value is within ``eps_n`` of ``background``
       is dropped (it is indistinguishable from the exterior).
    2. Adjacent layers with ``|c_m - c_{m+1}| < eps_n`` are merged into one
       layer carrying the width-weighted mean value.
    3. Layers thinner than ``eps_r * R`` are deleted; the next layer out
       absorbs the freed shell.
    """
    r, c = _split(vec)
    r, c = list(r), list(c)
    changed = True
    while changed and r:
        changed = False
        if background is not None and abs(c[-1] - background) < eps_n:
            r.pop(), c.pop()
            changed = True
            continue
        for m in range(len(r) - 1):
            if abs(c[m] - c[m + 1]) < eps_n:
                inner = r[m - 1] if m > 0 else 0.0
                w1, w2 = r[m] - inner, r[m + 1] - r[m]
                c[m + 1] = (w1 * c[m] + w2 * c[m + 1]) / (w1 + w2) if w1 + w2 > 0 else c[m + 1]
                del r[m], c[m]
                changed = True
                break
        if changed:
            continue
        for m in range(len(r)):
            inner = r[m - 1] if m > 0 else 0.0
            if r[m] - inner < eps_r * R:
                del r[m], c[m]
                changed = True
                break
    return np.array(r + c, dtype=float)


def pad_profile(vec, n_layers: int, fill: float) -> np.ndarray:
    """Pad a reduced profile to ``n_layers`` with zero-width central layers."""
    r, c = _split(vec)
    k = n_layers - r.size
    if k < 0:
        raise ValueError("profile has more layers than requested")
    c0 = c[0] if c.size else fill
    return np.r_[np.zeros(k), r, np.full(k, c0), c]


def lmm_local(
    obj,
    start,
    domain: BoxDomain,
    reduce_params: ReduceParams | None = None,
    tol: float = 1e-8,
    step: float = 0.16,
    atol: float = 1e-18,
) -> MinimizeOutcome:
    """Reduce, minimize with Powell in the reduced space, reduce again.

    ``obj`` always receives full-length (padded) vectors, so it never needs to
    know about the reduction. The returned point is padded to full length and
    ``extra["reduced"]`` holds the reduced vector.
    """
    if domain.radius_slice is None:
        raise ValueError("lmm_local needs a layered domain")
    if not isinstance(obj, ObjectiveHandle):
        obj = ObjectiveHandle(obj)
    rp = reduce_params or ReduceParams()
    n_layers = domain.dim // 2
    R = float(domain.upper[0])
    c_lo, c_hi = float(domain.lower[n_layers]), float(domain.upper[n_layers])
    eps_n = rp.eps_n if rp.eps_n is not None else 0.01 * (c_hi - c_lo)
    fill = rp.background if rp.background is not None else c_lo
    evals0 = obj.evals

    def full(v):
        return pad_profile(v, n_layers, fill)

    q0 = reduce_profile(domain.project(start), R, rp.eps_r, eps_n, rp.background)
    m = q0.size // 2
    stages = [obj(full(q0))]
    if m == 0:
        q1, f1, sweeps = q0, stages[0], 0
    else:
        sub = BoxDomain.layers(m, R, c_lo, c_hi)
        res = powell_minimize(lambda v: obj(full(v)), q0, sub, tol=tol, step=step, atol=atol)
        q1, f1, sweeps = res.best_point, res.best_value, res.iterations
    stages.append(f1)
    q2 = reduce_profile(q1, R, rp.eps_r, eps_n, rp.background)
    f2 = obj(full(q2)) if q2.size != q1.size else f1
    if f2 > f1 * (1 + tol) + atol:
        # the last reduction would cost accuracy; keep the unreduced minimizer
        q2, f2 = q1, f1
    stages.append(f2)
    return MinimizeOutcome(
        full(q2), f2, iterations=sweeps, evals=obj.evals - evals0, stopped_by="tolerance",
        extra={"reduced": q2, "stage_values": stages},
    )
