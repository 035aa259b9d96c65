"""Scattering-amplitude sources shared by the support function and linear sampling methods."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["FarFieldMatrix", "AmplitudeSource", "uniform_directions", "angle_of"]


def uniform_directions(N: int) -> np.ndarray:
    """``alpha_i = (cos 2 pi i / N, sin 2 pi i / N)``, ``i = 0..N-1``."""
    t = 2.0 * np.pi * np.arange(N) / N
    return np.c_[np.cos(t), np.sin(t)]


def angle_of(v) -> float:
    v = np.asarray(v, dtype=float)
    if v.shape != (2,) or not np.isclose(np.hypot(*v), 1.0, atol=1e-9):
        raise ValueError("direction must be a unit 2-vector")
    return math.atan2(v[1], v[0])


def _trig_weights(N: int, x: float) -> np.ndarray:
    """Weights of the degree-N/2 trigonometric interpolant at angle ``x``.

    For even ``N`` the Nyquist mode is split evenly between ``+-N/2`` so that
    real samples give a real interpolant.
    """
    d = x - 2.0 * np.pi * np.arange(N) / N
    d = (d + np.pi) % (2.0 * np.pi) - np.pi
    w = np.ones(N)
    nz = np.abs(d) > 1e-14
    dn = d[nz]
    if N % 2:
        w[nz] = np.sin(N * dn / 2) / (N * np.sin(dn / 2))
    else:
        w[nz] = np.sin(N * dn / 2) / (N * np.tan(dn / 2))
    w[~nz] = 1.0
    if np.any(~nz):
        w[nz] = 0.0
    return w


@dataclass
class FarFieldMatrix:
    """Sampled amplitudes ``F[i, j] = A(alpha_i, alpha_j)`` on ``N`` uniform directions.

    Rows index the observation direction, columns the incident direction.
    """

    k: float
    F: np.ndarray

    def __post_init__(self):
        self.F = np.asarray(self.F, dtype=complex)
        if self.F.ndim != 2 or self.F.shape[0] != self.F.shape[1]:
            raise ValueError("far-field matrix must be square")
        if self.N < 4:
            raise ValueError("need at least 4 directions")
        if not self.k > 0:
            raise ValueError("k must be positive")

    @property
    def N(self) -> int:
        return self.F.shape[0]

    @property
    def directions(self) -> np.ndarray:
        return uniform_directions(self.N)

    def interpolate(self, alpha_out, alpha_in) -> complex:
        """Trigonometric interpolation in both angles."""
        wo = _trig_weights(self.N, angle_of(alpha_out))
        wi = _trig_weights(self.N, angle_of(alpha_in))
        return complex(wo @ self.F @ wi)


@dataclass
class AmplitudeSource:
    """Scattering amplitude ``A(alpha_out, alpha_in)`` at wavenumber ``k``.

    Exactly one of ``fn`` (an analytic callback) or ``matrix`` (sampled data,
    trigonometrically interpolated) must be given.
    """

    k: float
    fn: Callable | None = None
    matrix: FarFieldMatrix | None = None

    def __post_init__(self):
        if (self.fn is None) == (self.matrix is None):
            raise ValueError("give exactly one of fn or matrix")
        if self.matrix is not None and not np.isclose(self.matrix.k, self.k):
            raise ValueError("matrix wavenumber differs from k")

    def __call__(self, alpha_out, alpha_in) -> complex:
        if self.fn is not None:
            return complex(self.fn(np.asarray(alpha_out, float), np.asarray(alpha_in, float)))
        return self.matrix.interpolate(alpha_out, alpha_in)

    @classmethod
    def circle(cls, k: float, a: float = 1.0, center=(0.0, 0.0), bc: str = "dirichlet", h: float = 0.0):
        """Exact amplitude of a circle (see :func:`scatopt.forward.circle_amplitude`)."""
        from .forward.circle import circle_amplitude, circle_mode_ratios

        circle_mode_ratios(a, k, bc, h)  # validate once
        return cls(k, fn=lambda ao, ai: circle_amplitude(a, center, k, ao, ai, bc, h))
