"""Special functions used throughout the package.

Thin, domain-checked wrappers around :mod:`scipy.special` for cylindrical and
spherical Bessel/Hankel functions, the outgoing spherical Hankel function
normalized to behave like ``exp(i r) / r``, orthonormal spherical harmonics
and the gamma function.

All functions accept scalars or array-likes and broadcast like numpy ufuncs.
A scalar input returns a Python scalar.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

__all__ = [
    "DomainError",
    "cyl_bessel",
    "sph_bessel",
    "sph_hankel_norm",
    "sph_harmonic",
    "gamma_fn",
]


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


def _finish(value, scalar: bool):
    if scalar:
        value = value.item()
    return value


def _check_order(order) -> np.ndarray:
    order = np.asarray(order)
    if not np.issubdtype(order.dtype, np.integer):
        if not np.all(np.equal(np.mod(order, 1), 0)):
            raise DomainError("order must be an integer")
        order = order.astype(int)
    if np.any(order < 0):
        raise DomainError("order must be nonnegative")
    return order


def cyl_bessel(kind: str, order, x, derivative: bool = False):
    """Cylindrical Bessel function ``J``, ``Y`` or Hankel ``H1`` of integer order.

    Parameters
    ----------
    kind : {"J", "Y", "H1"}
    order : int or array of int, ``>= 0``
    x : float or array, ``x >= 0`` for J and ``x > 0`` for Y/H1
    derivative : bool
        Return the first derivative with respect to ``x`` instead.

    Returns
    -------
    complex or ndarray of complex
    """
    scalar = np.ndim(order) == 0 and np.ndim(x) == 0
    order = _check_order(order)
    x = np.asarray(x, dtype=float)
    if kind == "J":
        if np.any(x < 0):
            raise DomainError("J requires x >= 0")
        f = special.jvp(order, x) if derivative else special.jv(order, x)
    elif kind in ("Y", "H1"):
        if np.any(x <= 0):
            raise DomainError(f"{kind} requires x > 0")
        if kind == "Y":
            f = special.yvp(order, x) if derivative else special.yv(order, x)
        else:
            f = special.h1vp(order, x) if derivative else special.hankel1(order, x)
    else:
        raise DomainError(f"unknown Bessel kind {kind!r}")
    f = np.asarray(f, dtype=complex)
    if not np.all(np.isfinite(f)):
        raise OverflowError("Bessel value overflowed for the requested order/argument")
    return _finish(f, scalar)


def sph_bessel(kind: str, order, x, derivative: bool = False):
    """Spherical Bessel function ``j`` or ``y`` for real or complex argument.

    ``y`` follows the convention ``y_0(x) = -cos(x)/x``.
    """
    scalar = np.ndim(order) == 0 and np.ndim(x) == 0
    order = _check_order(order)
    x = np.asarray(x)
    if not np.iscomplexobj(x):
        x = x.astype(float)
    if kind == "j":
        f = special.spherical_jn(order, x, derivative=derivative)
    elif kind == "y":
        if np.any(x == 0):
            raise DomainError("y is singular at x = 0")
        f = special.spherical_yn(order, x, derivative=derivative)
    else:
        raise DomainError(f"unknown spherical Bessel kind {kind!r}")
    return _finish(np.asarray(f, dtype=complex), scalar)


def sph_hankel_norm(order, r, derivative: bool = False):
    """Outgoing spherical Hankel function normalized so that ``h(r) ~ exp(i r)/r``.

    ``h_l(r) = exp(i pi (l+1)/2) sqrt(pi/(2r)) H^(1)_{l+1/2}(r)``, which equals
    ``i**(l+1) * (j_l(r) + i y_l(r))``.
    """
    scalar = np.ndim(order) == 0 and np.ndim(r) == 0
    order = _check_order(order)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("r must be positive")
    h = special.spherical_jn(order, r, derivative) + 1j * special.spherical_yn(order, r, derivative)
    # i**(l+1) without complex power round-off
    phase = np.array([1j, -1.0, -1j, 1.0])[np.mod(order, 4)]
    return _finish(np.asarray(phase * h, dtype=complex), scalar)


def sph_harmonic(l, m, theta, phi):
    """Orthonormal spherical harmonic ``Y_lm`` (Condon-Shortley phase).

    ``theta`` is the polar angle measured from the +z axis, ``phi`` the azimuth.
    """
    scalar = all(np.ndim(a) == 0 for a in (l, m, theta, phi))
    l = _check_order(l)
    m = np.asarray(m, dtype=int)
    if np.any(np.abs(m) > l):
        raise DomainError("|m| must not exceed l")
    y = special.sph_harm_y(l, m, np.asarray(theta, float), np.asarray(phi, float))
    return _finish(np.asarray(y, dtype=complex), scalar)


def gamma_fn(x: float) -> float:
    """Gamma function for positive real ``x``."""
    if not x > 0:
        raise DomainError("gamma_fn requires x > 0")
    return math.gamma(x)
