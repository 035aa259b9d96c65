"""Fixed-energy phase shifts of a piecewise-constant spherically symmetric potential.

The radial Schroedinger equation ``-u'' + l(l+1)/r^2 u + q u = k^2 u`` is solved
shell by shell: in a shell with constant ``q_m`` the radial function is a
combination of ``j_l(kappa_m r)`` and ``y_l(kappa_m r)`` with
``kappa_m = sqrt(k^2 - q_m)`` (complex above the barrier top, handled in the
same code path). The value and radial derivative are carried across the
interfaces as a normalized pair.
"""

from __future__ import annotations

import numpy as np
from scipy import special

from .models import PhaseShiftSet, RadialProfile

__all__ = ["phase_shifts", "noisy_shifts", "WELLS", "well"]

# square wells q = depth on [0, 8), 0 beyond
WELLS = {"q1": -2.0 / 3.0, "q2": -4.0, "q3": -10.0}


def _normalize(u, du):
    s = np.hypot(np.abs(u), np.abs(du))
    s = np.where(s > 0, s, 1.0)
    return u / s, du / s


def _kappa(k: float, q: float):
    e = k * k - q
    # real arguments are much cheaper for scipy's spherical Bessel routines
    return np.sqrt(e) if e > 0 else np.sqrt(complex(e))


def _shifts(shells, k: float, ls: np.ndarray) -> np.ndarray:
    jn, yn = special.spherical_jn, special.spherical_yn
    with np.errstate(all="ignore"):
        _, ro, q = shells[0]
        kap = _kappa(k, q)
        x = kap * ro
        u, du = jn(ls, x), kap * jn(ls, x, derivative=True)
        # j_l underflows for l >> |x|; there R'/R -> l/r
        dead = (u == 0) & (du == 0)
        u = np.where(dead, 1.0, u)
        du = np.where(dead, ls / ro, du)
        u, du = _normalize(u, du)
        for ri, ro, q in shells[1:]:
            kap = _kappa(k, q)
            xi, xo = kap * ri, kap * ro
            ji, yi = jn(ls, xi), yn(ls, xi)
            jpi, ypi = jn(ls, xi, derivative=True), yn(ls, xi, derivative=True)
            det = kap / xi**2
            a = (u * kap * ypi - du * yi) / det
            b = (du * ji - u * kap * jpi) / det
            jo, yo = jn(ls, xo), yn(ls, xo)
            jpo, ypo = jn(ls, xo, derivative=True), yn(ls, xo, derivative=True)
            nu, ndu = a * jo + b * yo, kap * (a * jpo + b * ypo)
            bad = ~(np.isfinite(nu) & np.isfinite(ndu)) | ((nu == 0) & (ndu == 0))
            if np.any(bad):
                # y overflowed deep inside the centrifugal barrier; keep the regular part
                nu = np.where(bad, jo, nu)
                ndu = np.where(bad, kap * jpo, ndu)
            u, du = _normalize(nu, ndu)

        x = k * shells[-1][1]
        j, jp = jn(ls, x), jn(ls, x, derivative=True)
        y, yp = yn(ls, x), yn(ls, x, derivative=True)
        num = k * jp * u - j * du
        den = k * yp * u - y * du
        # u, du share one complex phase, so num/den is real up to round-off
        t = (num * np.conj(den)).real
        d = (den * np.conj(den)).real
        delta = np.arctan2(t, d)
    return delta


def phase_shifts(profile: RadialProfile, k: float, l_max: int) -> PhaseShiftSet:
    """Phase shifts ``delta_l``, ``l = 0..l_max``, for the potential ``profile``.

    ``delta_l`` is taken on the principal branch of ``arctan`` so that a
    vanishing potential gives exactly zero shifts.
    """
    if not k > 0:
        raise ValueError("k must be positive")
    if l_max < 0:
        raise ValueError("l_max must be nonnegative")
    ls = np.arange(l_max + 1)
    shells = profile.active_shells()
    if not shells:
        return PhaseShiftSet(k, np.zeros(l_max + 1))
    delta = _shifts(shells, k, ls)
    if not np.all(np.isfinite(delta)):
        # a node or a zero of kappa exactly on an interface; nudge the radii
        eps = 1e-12 * profile.outer_radius
        shells = [(ri + eps * (i > 0), ro + eps, q) for i, (ri, ro, q) in enumerate(shells)]
        delta = _shifts(shells, k, ls)
        if not np.all(np.isfinite(delta)):
            raise FloatingPointError("nonfinite interface matching in phase-shift computation")
    # arctan2(t, d) with d >= 0 lies in [-pi/2, pi/2]; map -pi/2 to +pi/2
    delta = np.where(delta <= -np.pi / 2, delta + np.pi, delta)
    return PhaseShiftSet(k, delta)


def noisy_shifts(shifts: PhaseShiftSet, h: float, seed: int = 0) -> PhaseShiftSet:
    """Perturb each shift as ``delta * (1 + (0.5 - z) h)`` with ``z ~ U[0, 1]``."""
    if h < 0:
        raise ValueError("noise level must be nonnegative")
    if h == 0:
        return PhaseShiftSet(shifts.k, shifts.shifts.copy())
    z = np.random.default_rng(seed).uniform(0.0, 1.0, size=shifts.shifts.shape)
    return PhaseShiftSet(shifts.k, shifts.shifts * (1.0 + (0.5 - z) * h))


def well(name: str, outer_radius: float = 10.0) -> RadialProfile:
    """One of the square wells ``q1``, ``q2``, ``q3``."""
    if name not in WELLS:
        raise ValueError(f"unknown well {name!r}; choose from {sorted(WELLS)}")
    return RadialProfile([8.0], [WELLS[name]], outer_radius, 0.0)
