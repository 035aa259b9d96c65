"""Linear Sampling indicators on a 2D grid.

For a test point ``z`` the far-field equation ``F g = f_z`` with
``f_z(alpha_n) = e^{i pi/4} / sqrt(8 pi k) exp(-i k alpha_n . z)`` is
"solved" spectrally from one SVD ``F = U S V^H``:

* Colton-Kress: ``||g||^2 = sum |rho_n|^2 / s_n^2`` with ``rho = U^H f``;
* Kirsch: ``||g||^2 = sum |mu_n|^2 / s_n`` with ``mu = V^H f``.

No singular-value cutoff is applied, so tiny ``s_n`` dominate away from the
obstacle. Small indicator values mark the obstacle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .amplitude import AmplitudeSource, FarFieldMatrix, uniform_directions

__all__ = [
    "FarFieldMatrix",
    "IndicatorGrid",
    "SvdCache",
    "build_far_matrix",
    "lsm_indicator",
    "lsm_scan",
    "VARIANTS",
]

VARIANTS = ("colton_kress", "kirsch")


def build_far_matrix(src: AmplitudeSource, N: int, k: float | None = None) -> FarFieldMatrix:
    """``F[i, j] = A(alpha_i, alpha_j)`` on ``N`` uniform directions."""
    if N < 4:
        raise ValueError("need at least 4 directions")
    k = src.k if k is None else k
    d = uniform_directions(N)
    F = np.array([[src(d[i], d[j]) for j in range(N)] for i in range(N)])
    return FarFieldMatrix(k, F)


@dataclass
class SvdCache:
    """One SVD per far-field matrix, reused for every test point."""

    matrix: FarFieldMatrix
    U: np.ndarray = field(init=False)
    s: np.ndarray = field(init=False)
    Vh: np.ndarray = field(init=False)

    def __post_init__(self):
        if not np.any(self.matrix.F):
            raise ValueError("far-field matrix is identically zero")
        self.U, self.s, self.Vh = np.linalg.svd(self.matrix.F)


def _rhs(F: FarFieldMatrix, Z: np.ndarray) -> np.ndarray:
    """Columns ``f_z`` for the rows of ``Z``; shape (N, P)."""
    pref = np.exp(1j * math.pi / 4) / math.sqrt(8.0 * math.pi * F.k)
    return pref * np.exp(-1j * F.k * F.directions @ Z.T)


def _indicators(cache: SvdCache, Z: np.ndarray, variant: str) -> np.ndarray:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    f = _rhs(cache.matrix, Z)
    s = cache.s
    pos = s > 0
    if variant == "colton_kress":
        coef = cache.U.conj().T @ f
        terms = np.abs(coef[pos]) ** 2 / s[pos, None] ** 2
    else:
        coef = cache.Vh @ f
        terms = np.abs(coef[pos]) ** 2 / s[pos, None]
    return np.sqrt(terms.sum(axis=0))


def lsm_indicator(F, z, variant: str = "colton_kress") -> float:
    """``||g||`` at the point ``z``; ``F`` may be a matrix or an :class:`SvdCache`."""
    cache = F if isinstance(F, SvdCache) else SvdCache(F)
    z = np.asarray(z, dtype=float).reshape(1, 2)
    return float(_indicators(cache, z, variant)[0])


@dataclass
class IndicatorGrid:
    """``values[iy, ix] = log10 ||g||`` at ``(x[ix], y[iy])``."""

    x0: float
    x1: float
    y0: float
    y1: float
    nx: int
    ny: int
    values: np.ndarray
    variant: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.ny, self.nx):
            raise ValueError("values must have shape (ny, nx)")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.nx)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(self.y0, self.y1, self.ny)

    def argmin(self) -> np.ndarray:
        iy, ix = np.unravel_index(np.argmin(self.values), self.values.shape)
        return np.array([self.x[ix], self.y[iy]])

    def argmax(self) -> np.ndarray:
        iy, ix = np.unravel_index(np.argmax(self.values), self.values.shape)
        return np.array([self.x[ix], self.y[iy]])

    def spec(self) -> dict:
        return {"x0": self.x0, "x1": self.x1, "y0": self.y0, "y1": self.y1,
                "nx": self.nx, "ny": self.ny, "variant": self.variant}

    def write_sidecar(self, path) -> None:
        d = self.spec()
        d["argmin"], d["argmax"] = self.argmin().tolist(), self.argmax().tolist()
        Path(path).write_text(json.dumps(d, indent=2))


def lsm_scan(F, grid: dict, variant: str = "colton_kress") -> IndicatorGrid:
    """``log10 ||g||`` on the lattice ``grid = {x0, x1, y0, y1, nx, ny}`` from a single SVD."""
    nx, ny = int(grid["nx"]), int(grid["ny"])
    if nx < 2 or ny < 2:
        raise ValueError("grid needs nx, ny >= 2")
    cache = F if isinstance(F, SvdCache) else SvdCache(F)
    xs = np.linspace(grid["x0"], grid["x1"], nx)
    ys = np.linspace(grid["y0"], grid["y1"], ny)
    X, Y = np.meshgrid(xs, ys)
    Z = np.c_[X.ravel(), Y.ravel()]
    vals = np.log10(_indicators(cache, Z, variant)).reshape(ny, nx)
    return IndicatorGrid(float(grid["x0"]), float(grid["x1"]), float(grid["y0"]), float(grid["y1"]),
                         nx, ny, vals, variant)
