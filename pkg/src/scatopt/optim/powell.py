"""Powell's direction-set method restricted to a box.

Work happens in unit-cube coordinates so that one step length suits every
coordinate regardless of units. Each line minimization brackets a minimum
inside the feasible segment and refines it with bounded Brent; a move is
taken only when it lowers the objective, so the iterates never leave the box
and the value never increases.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize_scalar

from .types import BoxDomain, MinimizeOutcome, ObjectiveHandle

__all__ = ["powell_minimize"]

_GOLD = 1.618034


class _Scaled:
    """Objective in unit-cube coordinates over the free (non-degenerate) axes."""

    def __init__(self, obj, domain: BoxDomain, start):
        self.obj = obj
        self.domain = domain
        self.free = domain.width > 0
        self.base = domain.project(start)
        self.best_x = self.base.copy()
        self.best_f = np.inf

    def to_x(self, u):
        x = self.base.copy()
        x[self.free] = self.domain.lower[self.free] + u * self.domain.width[self.free]
        return self.domain.project(x)

    def to_u(self, x):
        return (x[self.free] - self.domain.lower[self.free]) / self.domain.width[self.free]

    def __call__(self, u):
        x = self.to_x(u)
        f = self.obj(x)
        if f < self.best_f:
            self.best_f, self.best_x = f, x
        return f


def _segment(u, d):
    """Feasible ``t`` range keeping ``u + t d`` inside the unit cube."""
    lo, hi = -np.inf, np.inf
    for ui, di in zip(u, d):
        if di > 0:
            lo, hi = max(lo, -ui / di), min(hi, (1 - ui) / di)
        elif di < 0:
            lo, hi = max(lo, (1 - ui) / di), min(hi, -ui / di)
    return max(lo, -1e300), min(hi, 1e300)


def _line_min(f, u, fu, d, step, xtol):
    """Minimize ``f(u + t d)`` over the feasible segment; returns (f, u)."""
    t_lo, t_hi = _segment(u, d)
    if t_hi - t_lo <= 1e-14:
        return fu, u
    phi = lambda t: f(u + t * d)
    a, fa = 0.0, fu
    # shrink the trial step until one side goes downhill
    s, b = step, None
    while s > xtol:
        for t in (min(s, t_hi), max(-s, t_lo)):
            if t != 0.0:
                ft = phi(t)
                if ft < fa:
                    b, fb = t, ft
                    break
        if b is not None:
            break
        s *= 0.1
    if b is None:
        return fu, u
    # expand downhill until the value rises or the boundary is reached
    limit = t_hi if b > 0 else t_lo
    prev = a
    while True:
        c = b + _GOLD * (b - prev)
        c = min(c, limit) if b > 0 else max(c, limit)
        if c == b:
            lo, hi = sorted((prev, b))
            break
        fc = phi(c)
        if fc >= fb:
            lo, hi = sorted((prev, c))
            break
        prev, b, fb = b, c, fc
    res = minimize_scalar(phi, bounds=(lo, hi), method="bounded", options={"xatol": xtol})
    if res.fun < fb:
        b, fb = res.x, res.fun
    return (fb, u + b * d) if fb < fu else (fu, u)


def powell_minimize(
    obj,
    start,
    domain: BoxDomain,
    tol: float = 1e-10,
    max_sweeps: int = 200,
    step: float = 0.16,
    xtol: float = 1e-9,
    max_evals: int | None = None,
    atol: float = 1e-25,
) -> MinimizeOutcome:
    """Minimize ``obj`` over ``domain`` from ``start``.

    Parameters
    ----------
    obj : callable or ObjectiveHandle
    start : array
        Initial point; projected onto the domain first.
    tol : float
        Stop when a full sweep lowers the value by less than ``tol`` relative.
    step : float
        Initial bracketing step as a fraction of each box edge.
    max_evals : int, optional
        Evaluation budget, checked after each sweep; exhausting it stops
        with ``stopped_by="budget"``.
    atol : float
        Absolute floor added to the sweep test, so that objectives with an
        exact zero minimum stop once their decrease is below this size.
    """
    if not isinstance(obj, ObjectiveHandle):
        obj = ObjectiveHandle(obj)
    evals0 = obj.evals
    f = _Scaled(obj, domain, start)
    n = int(f.free.sum())
    u = f.to_u(f.base)
    fu = f(u)
    if n == 0:
        return MinimizeOutcome(f.best_x, f.best_f, 0, obj.evals - evals0, "tolerance")
    dirs = list(np.eye(n))
    stopped = "budget"
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        f0, u0 = fu, u.copy()
        big, big_drop = 0, 0.0
        for i, d in enumerate(dirs):
            before = fu
            fu, u = _line_min(f, u, fu, d, step, xtol)
            if before - fu > big_drop:
                big, big_drop = i, before - fu
        if 2.0 * (f0 - fu) <= tol * (abs(f0) + abs(fu)) + atol:
            stopped = "tolerance"
            break
        if max_evals is not None and obj.evals - evals0 >= max_evals:
            break
        # extrapolated point along the sweep's net displacement
        disp = u - u0
        norm = np.linalg.norm(disp)
        if norm == 0:
            continue
        ue = u + disp
        fe = f(ue) if np.all((ue >= 0) & (ue <= 1)) else np.inf
        if fe < f0:
            t = 2.0 * (f0 - 2.0 * fu + fe) * (f0 - fu - big_drop) ** 2 - big_drop * (f0 - fe) ** 2
            if t < 0:
                d = disp / norm
                fu, u = _line_min(f, u, fu, d, step, xtol)
                dirs[big] = dirs[-1]
                dirs[-1] = d
    x = f.to_x(u)
    val = fu
    if f.best_f < val:
        x, val = f.best_x, f.best_f
    return MinimizeOutcome(x, val, sweeps, obj.evals - evals0, stopped)
