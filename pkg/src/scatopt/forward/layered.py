"""Plane-wave scattering by a 2D circularly layered penetrable cylinder.

Each angular mode ``l`` is handled separately. Inside layer ``m`` the field is
``a J_l(k_m r) + b Y_l(k_m r)`` with ``k_m^2 = k0^2 n_m``; outside the last
interface it is ``i^l J_l(k0 r) + c_l H^(1)_l(k0 r)``. Continuity of the field
and its radial derivative is propagated outward as a normalized
``(u, du/dr)`` pair, which stays finite even when the field has a node at an
interface.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .models import LayeredFieldSamples, RadialProfile

__all__ = ["mode_coefficients", "scattering_matrix", "layered_circle_field"]

_TAIL_TOL = 1e-12
_L_CAP = 2000


def _normalize(u, du):
    s = np.hypot(np.abs(u), np.abs(du))
    s = np.where(s > 0, s, 1.0)
    return u / s, du / s


def mode_coefficients(profile: RadialProfile, k0: float, l_max: int) -> np.ndarray:
    """Exterior scattering coefficients ``c_l`` for ``l = 0..l_max``."""
    if not k0 > 0:
        raise ValueError("k0 must be positive")
    if np.any(profile.values <= 0):
        raise ValueError("refractive indices must be positive")
    ls = np.arange(l_max + 1)
    shells = profile.active_shells()
    if not shells:
        return np.zeros(l_max + 1, dtype=complex)

    with np.errstate(all="ignore"):
        _, ro, n = shells[0]
        km = k0 * math.sqrt(n)
        u, du = _normalize(special.jv(ls, km * ro), km * special.jvp(ls, km * ro))
        # deep in the evanescent zone J underflows; the regular solution has u'/u = l/r
        dead = (u == 0) & (du == 0)
        u = np.where(dead, 1.0, u)
        du = np.where(dead, ls / ro, du)
        u, du = _normalize(u, du)
        for ri, ro, n in shells[1:]:
            km = k0 * math.sqrt(n)
            xi, xo = km * ri, km * ro
            Ji, Yi = special.jv(ls, xi), special.yv(ls, xi)
            Jpi, Ypi = special.jvp(ls, xi), special.yvp(ls, xi)
            det = km * 2.0 / (math.pi * xi)
            a = (u * km * Ypi - du * Yi) / det
            b = (du * Ji - u * km * Jpi) / det
            Jo, Yo = special.jv(ls, xo), special.yv(ls, xo)
            Jpo, Ypo = special.jvp(ls, xo), special.yvp(ls, xo)
            nu, ndu = a * Jo + b * Yo, km * (a * Jpo + b * Ypo)
            bad = ~(np.isfinite(nu) & np.isfinite(ndu)) | ((nu == 0) & (ndu == 0))
            if np.any(bad):
                # Y overflowed: the irregular part is negligible, keep the regular solution
                nu = np.where(bad, Jo, nu)
                ndu = np.where(bad, km * Jpo, ndu)
            u, du = _normalize(nu, ndu)

        r_out = shells[-1][1]
        x = k0 * r_out
        J, Jp = special.jv(ls, x), special.jvp(ls, x)
        H, Hp = special.hankel1(ls, x), special.h1vp(ls, x)
        il = np.array([1, 1j, -1, -1j])[ls % 4]
        c = il * (k0 * Jp * u - J * du) / (H * du - k0 * Hp * u)
    c = np.where(np.isfinite(c), c, 0.0)
    return c


def scattering_matrix(profile: RadialProfile, k0: float, l_max: int) -> np.ndarray:
    """Per-mode S-matrix entries ``1 + 2 c_l / i^l``; unimodular for lossless layers."""
    ls = np.arange(l_max + 1)
    il = np.array([1, 1j, -1, -1j])[ls % 4]
    return 1.0 + 2.0 * mode_coefficients(profile, k0, l_max) / il


def layered_circle_field(profile: RadialProfile, k0: float, R: float, angles) -> LayeredFieldSamples:
    """Total field ``u(R, theta)`` for the incident plane wave ``exp(i k0 x1)``."""
    angles = np.asarray(angles, dtype=float)
    if profile.n_layers and profile.breakpoints[-1] > R * (1 + 1e-12):
        raise ValueError("measurement radius must enclose the scatterer")
    x = k0 * R
    l_max = int(math.ceil(x)) + 20
    while True:
        c = mode_coefficients(profile, k0, l_max)
        terms = c * special.hankel1(np.arange(l_max + 1), x)
        scale = np.max(np.abs(terms)) if terms.size else 0.0
        if scale == 0 or abs(terms[-1]) < _TAIL_TOL * scale or l_max >= _L_CAP:
            break
        l_max += 20
    ls = np.arange(l_max + 1)
    weights = np.where(ls == 0, 1.0, 2.0)
    scattered = np.cos(np.outer(angles, ls)) @ (weights * terms)
    u = np.exp(1j * x * np.cos(angles)) + scattered
    return LayeredFieldSamples(k0, R, angles, u, {"l_max": l_max})
