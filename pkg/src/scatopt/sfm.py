"""Support Function Method: localization of a convex obstacle from its scattering amplitude.

For a convex obstacle ``D`` and a unit vector ``l`` the support function is
``d(l) = min_{x in D} x . l``; the specular point ``s0(l)`` attains the
minimum and the outward normal there is ``-l``. In the high-frequency
(Kirchhoff) approximation the amplitude of a sound-soft obstacle is

    A(alpha', alpha) ~ -1/2 sqrt(|alpha - alpha'| / kappa) exp(i k |alpha - alpha'| d(l)),

with ``l = (alpha - alpha') / |alpha - alpha'|``, so ``d(l)`` can be read off
from the phase of ``A`` over a cone of incident directions.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import linprog, minimize_scalar
from scipy.spatial import HalfspaceIntersection

from .amplitude import AmplitudeSource, FarFieldMatrix, angle_of

__all__ = [
    "Circle",
    "Ellipse",
    "SupportSamples",
    "RobinEstimate",
    "AmplitudeSource",
    "FarFieldMatrix",
    "kirchhoff_amplitude",
    "cone_pairs",
    "support_from_amplitude",
    "support_robin",
    "recover_support",
    "reconstruct_boundary",
    "convex_hull_halfplanes",
    "write_points_csv",
]

A_PRIORI_RADIUS = 20.0


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    angle_of(v)
    return v


@dataclass(frozen=True)
class Circle:
    center: tuple = (0.0, 0.0)
    a: float = 1.0

    def support(self, l) -> float:
        return float(np.dot(self.center, l) - self.a)

    def specular_point(self, l) -> np.ndarray:
        return np.asarray(self.center, float) - self.a * np.asarray(l, float)

    def curvature(self, l) -> float:
        return 1.0 / self.a


@dataclass(frozen=True)
class Ellipse:
    """Axis-aligned ellipse ``((x1-c1)/a)^2 + ((x2-c2)/b)^2 = 1``."""

    center: tuple = (0.0, 0.0)
    a: float = 2.0
    b: float = 1.0

    def _h(self, l) -> float:
        return math.hypot(self.a * l[0], self.b * l[1])

    def support(self, l) -> float:
        return float(np.dot(self.center, l) - self._h(l))

    def specular_point(self, l) -> np.ndarray:
        l = np.asarray(l, float)
        return np.asarray(self.center, float) - np.array([self.a**2 * l[0], self.b**2 * l[1]]) / self._h(l)

    def curvature(self, l) -> float:
        # radius of curvature of a convex body is h + h'' = (ab)^2 / h^3
        return self._h(l) ** 3 / (self.a * self.b) ** 2


def kirchhoff_amplitude(shape, alpha_out, alpha_in, k: float, l=None) -> complex:
    """High-frequency approximation of the sound-soft amplitude.

    ``shape`` provides ``support(l)`` and ``curvature(l)``. If ``l`` is not
    given it is computed from the two directions, which must then differ;
    with an explicit ``l`` and ``alpha_out == alpha_in`` the result is 0.
    """
    ao, ai = _unit(alpha_out), _unit(alpha_in)
    diff = ai - ao
    dist = float(np.linalg.norm(diff))
    if l is None:
        if dist < 1e-12:
            raise ValueError("alpha_out == alpha_in leaves l undefined")
        l = diff / dist
    l = _unit(l)
    if dist < 1e-12:
        return 0j
    kap = shape.curvature(l)
    return complex(-0.5 * math.sqrt(dist / kap) * np.exp(1j * k * dist * shape.support(l)))


def _rotate(l, phi):
    c, s = np.cos(phi), np.sin(phi)
    return np.stack([c * l[0] - s * l[1], s * l[0] + c * l[1]], axis=-1)


def cone_pairs(l, phis):
    """Incident ``alpha = rot(phi) l`` and reflected ``alpha' = alpha - 2 (alpha . l) l``."""
    l = _unit(l)
    alpha = _rotate(l, np.asarray(phis, float))
    alpha_out = alpha - 2.0 * (alpha @ l)[:, None] * l
    return alpha_out, alpha


def _cone_data(src: AmplitudeSource, l, phis):
    ao, ai = cone_pairs(l, phis)
    A = np.array([src(o, i) for o, i in zip(ao, ai)])
    t = np.linalg.norm(ai - ao, axis=1)
    return A, t


def support_from_amplitude(
    src: AmplitudeSource,
    l,
    n_alpha: int = 32,
    t_range: tuple = (-A_PRIORI_RADIUS, A_PRIORI_RADIUS),
    step: float | None = None,
    tol: float = 1e-6,
) -> float:
    """Minimizer of ``Psi(t) = mean |A/|A| + exp(i k |alpha - alpha'| t)|^2`` over the cone.

    The cone is ``alpha . l > 1/sqrt(2)`` sampled at ``n_alpha`` midpoint
    angles. ``t`` is scanned on ``t_range`` with step ``pi / (16 k)`` by
    default and the best grid point is refined to ``tol``.
    """
    k = src.k
    phis = -np.pi / 4 + (np.arange(n_alpha) + 0.5) * (np.pi / 2) / n_alpha
    A, t = _cone_data(src, l, phis)
    mag = np.abs(A)
    keep = mag > 0
    if not np.any(keep):
        raise ValueError("amplitude vanishes on the whole cone")
    phase, t = A[keep] / mag[keep], t[keep]

    def psi(s):
        return np.mean(np.abs(phase[None, :] + np.exp(1j * k * np.outer(s, t))) ** 2, axis=1)

    step = step or np.pi / (16.0 * k)
    grid = np.arange(t_range[0], t_range[1] + 0.5 * step, step)
    values = psi(grid)
    i = int(np.argmin(values))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(lambda s: float(psi(np.atleast_1d(s))[0]), bounds=(lo, hi), method="bounded",
                          options={"xatol": tol})
    return float(res.x) if res.fun <= values[i] else float(grid[i])


@dataclass
class RobinEstimate:
    d: float
    h_est: float
    C1: float
    C2: float
    fit_rms: float
    reliable: bool


def support_robin(src: AmplitudeSource, l, k: float | None = None, n_t: int = 32,
                  rms_limit: float = 0.05) -> RobinEstimate:
    """Support value from a linear fit of the unwrapped phase ``psi(t) ~ C1 t + C2``.

    The incident direction is rotated from ``l`` by ``phi`` at ``n_t``
    midpoints of ``[0, pi/4)``, so ``t = |alpha - alpha'| = 2 cos phi`` runs
    over ``(sqrt 2, 2]``. The boundary condition need not be known:
    ``d = C1 / k`` and ``h_est = -k tan(C2 / 2)``. The ``reliable`` flag only
    reports whether the phase is close to linear.
    """
    if n_t < 3:
        raise ValueError("need at least 3 samples")
    k = src.k if k is None else k
    phis = (np.arange(n_t)[::-1] + 0.5) * (np.pi / 4) / n_t
    A, t = _cone_data(src, l, phis)
    keep = np.abs(A) > 0
    if keep.sum() < 3:
        raise ValueError("fewer than 3 nonzero amplitude samples")
    t, A = t[keep], A[keep]
    psi = np.unwrap(np.angle(A))
    C1, C2 = np.polyfit(t, psi, 1)
    rms = float(np.sqrt(np.mean((psi - (C1 * t + C2)) ** 2)))
    # C2 is only defined modulo 2 pi
    C2w = float((C2 + np.pi) % (2.0 * np.pi) - np.pi)
    h_est = float(-k * math.tan(C2w / 2.0))
    return RobinEstimate(float(C1 / k), h_est, float(C1), C2w, rms, rms <= rms_limit)


@dataclass
class SupportSamples:
    """Support values ``d_i`` for directions ``l_i = (cos t_i, sin t_i)``."""

    angles: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.angles.shape != self.values.shape or self.angles.ndim != 1:
            raise ValueError("angles and values must be 1D of equal length")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("support values must be finite")
        wrapped = np.sort(np.mod(self.angles, 2.0 * np.pi))
        if np.any(np.diff(wrapped) < 1e-12):
            raise ValueError("directions must be distinct")

    @property
    def directions(self) -> np.ndarray:
        return np.c_[np.cos(self.angles), np.sin(self.angles)]

    def to_csv(self, path) -> None:
        write_points_csv(path, np.c_[self.angles, self.values], ("t", "d"))

    @classmethod
    def from_csv(cls, path) -> "SupportSamples":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1])


def recover_support(src: AmplitudeSource, n_dirs: int = 40, method: str = "phase", **params) -> SupportSamples:
    """Support values for ``n_dirs`` uniform directions.

    ``method="phase"`` uses :func:`support_from_amplitude`, ``"robin"`` the
    regression of :func:`support_robin`.
    """
    t = 2.0 * np.pi * np.arange(n_dirs) / n_dirs
    dirs = np.c_[np.cos(t), np.sin(t)]
    if method == "phase":
        d = [support_from_amplitude(src, l, **params) for l in dirs]
    elif method == "robin":
        d = [support_robin(src, l, **params).d for l in dirs]
    else:
        raise ValueError(f"unknown method {method!r}")
    return SupportSamples(t, np.array(d))


def reconstruct_boundary(samples: SupportSamples) -> np.ndarray:
    """Envelope of the tangent lines ``x . l(t) = p(t)``.

    ``x1 = p cos t - p' sin t``, ``x2 = p sin t + p' cos t`` with ``p'`` from
    periodic central differences; requires at least 8 uniform directions.
    """
    n = len(samples.angles)
    if n < 8:
        raise ValueError("need at least 8 directions")
    order = np.argsort(np.mod(samples.angles, 2.0 * np.pi))
    t, p = np.mod(samples.angles[order], 2.0 * np.pi), samples.values[order]
    dt = 2.0 * np.pi / n
    if not np.allclose(np.diff(t), dt, atol=1e-9):
        raise ValueError("directions must be uniformly spaced")
    dp = (np.roll(p, -1) - np.roll(p, 1)) / (2.0 * dt)
    c, s = np.cos(t), np.sin(t)
    return np.c_[p * c - dp * s, p * s + dp * c]


def convex_hull_halfplanes(samples: SupportSamples) -> np.ndarray:
    """Vertices (counterclockwise) of ``{x : x . l_i >= d_i for all i}``."""
    if len(samples.angles) < 3:
        raise ValueError("need at least 3 directions")
    t = np.sort(np.mod(samples.angles, 2.0 * np.pi))
    if np.max(np.diff(np.r_[t, t[0] + 2.0 * np.pi])) >= np.pi:
        raise ValueError("directions do not span the circle; the intersection is unbounded")
    L = samples.directions
    # scipy form: A x + b <= 0, i.e. -l . x + d <= 0
    halfspaces = np.c_[-L, samples.values]
    # Chebyshev centre gives a strictly interior point
    res = linprog([0.0, 0.0, -1.0], A_ub=np.c_[-L, np.ones(len(L))], b_ub=-samples.values,
                  bounds=[(None, None), (None, None), (0.0, None)])
    if res.status != 0 or res.x[2] <= 1e-12:
        raise ValueError("empty intersection: inconsistent support data")
    hs = HalfspaceIntersection(halfspaces, res.x[:2])
    V = hs.intersections
    c = V.mean(axis=0)
    V = V[np.argsort(np.arctan2(V[:, 1] - c[1], V[:, 0] - c[0]))]
    keep = np.r_[True, np.linalg.norm(np.diff(V, axis=0), axis=1) > 1e-10]
    return V[keep]


def write_points_csv(path, points, header=("x1", "x2")) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in np.asarray(points, float):
            w.writerow([repr(float(v)) for v in row])


def write_polygon_json(path, vertices) -> None:
    Path(path).write_text(json.dumps({"vertices": np.asarray(vertices, float).tolist()}, indent=2))
