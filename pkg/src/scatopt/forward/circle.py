"""Exact far-field amplitude of a sound-soft or impedance circle."""

from __future__ import annotations

import math

import numpy as np
from scipy import special

__all__ = ["circle_amplitude", "circle_mode_ratios"]

_TERM_TOL = 1e-14


def _angle(v) -> float:
    v = np.asarray(v, dtype=float)
    n = np.hypot(v[0], v[1])
    if not np.isclose(n, 1.0, atol=1e-9):
        raise ValueError("direction must be a unit vector")
    return math.atan2(v[1], v[0])


def circle_mode_ratios(a: float, k: float, bc: str = "dirichlet", h: float = 0.0) -> np.ndarray:
    """Ratios ``J_l(ka)/H_l(ka)`` (or the impedance analogue) for ``l = 0..L``.

    ``L`` is the first order past ``ka`` at which the ratio drops below 1e-14.
    """
    if not (a > 0 and k > 0):
        raise ValueError("radius and wavenumber must be positive")
    x = k * a
    l_max = int(math.ceil(x)) + 20
    while True:
        ls = np.arange(l_max + 1)
        if bc == "dirichlet":
            r = special.jv(ls, x) / special.hankel1(ls, x)
        elif bc == "robin":
            r = (k * special.jvp(ls, x) + h * special.jv(ls, x)) / (k * special.h1vp(ls, x) + h * special.hankel1(ls, x))
        else:
            raise ValueError(f"unknown boundary condition {bc!r}")
        r = np.where(np.isfinite(r), r, 0.0)
        small = np.nonzero((ls > x) & (np.abs(r) < _TERM_TOL))[0]
        if small.size:
            return r[: small[0] + 1]
        l_max *= 2


def circle_amplitude(a: float, center, k: float, alpha_out, alpha_in, bc: str = "dirichlet", h: float = 0.0) -> complex:
    """Scattering amplitude ``A(alpha_out, alpha_in)`` of the circle ``|x - center| = a``.

    Normalized so that the scattered field behaves like ``A exp(ikr)/sqrt(r)``.
    ``bc="robin"`` imposes ``du/dn + h u = 0`` with the outward normal.
    """
    theta, beta = _angle(alpha_out), _angle(alpha_in)
    ratios = circle_mode_ratios(a, k, bc, h)
    ls = np.arange(ratios.size)
    weights = np.where(ls == 0, 1.0, 2.0)
    series = np.sum(weights * ratios * np.cos(ls * (theta - beta)))
    diff = np.asarray(alpha_in, float) - np.asarray(alpha_out, float)
    shift = np.exp(1j * k * diff @ np.asarray(center, dtype=float))
    return complex(-math.sqrt(2.0 / (math.pi * k)) * np.exp(-1j * math.pi / 4) * shift * series)
