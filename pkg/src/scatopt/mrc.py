"""Sound-soft obstacle scattering by the random multi-point Modified Rayleigh Conjecture.

The scattered field is built as a sum of outgoing multipoles centred at
random interior points. Each iteration draws fresh centres, fits the current
boundary discrepancy ``g`` by truncated-SVD least squares and subtracts the
fit, so the discrepancy norm never increases.

Norms on the boundary are ``||b||^2 = (1/M) sum_m |b_m|^2``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import special

from .specfun import sph_harmonic, sph_hankel_norm

__all__ = [
    "BoundaryMesh",
    "MrcParams",
    "MrcSolution",
    "make_boundary",
    "svd_min",
    "mrc_solve",
    "mrc_eval",
    "mrc_far_field",
    "write_far_field_csv",
]

_SHRINK = 0.95
_KITE = (-0.65, 0.65, 1.5)


def _polygon_inside(poly: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Even-odd ray casting test for points against a closed polygon."""
    x, y = pts[:, 0][:, None], pts[:, 1][:, None]
    x0, y0 = poly[:, 0][None, :], poly[:, 1][None, :]
    x1, y1 = np.roll(poly[:, 0], -1)[None, :], np.roll(poly[:, 1], -1)[None, :]
    crosses = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    return np.sum(crosses & (x < xint), axis=1) % 2 == 1


def _fibonacci_sphere(M: int) -> np.ndarray:
    i = np.arange(M) + 0.5
    z = 1.0 - 2.0 * i / M
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    rho = np.sqrt(1.0 - z * z)
    return np.c_[rho * np.cos(phi), rho * np.sin(phi), z]


@dataclass
class BoundaryMesh:
    """Boundary nodes of an obstacle plus what is needed to sample its interior."""

    dim: int
    nodes: np.ndarray
    shape: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        if self.dim not in (2, 3) or self.nodes.shape[1:] != (self.dim,):
            raise ValueError("nodes must be an (M, dim) array with dim 2 or 3")
        if len(self.nodes) < 1:
            raise ValueError("mesh needs at least one node")

    @property
    def M(self) -> int:
        return len(self.nodes)

    @property
    def centre(self) -> np.ndarray:
        if self.shape == "triangle":
            return np.asarray(self.params["vertices"], float).mean(axis=0)
        if self.shape == "circle":
            return np.asarray(self.params.get("center", (0.0, 0.0)), float)
        return np.zeros(self.dim)

    def inside(self, pts) -> np.ndarray:
        """True for points strictly inside the obstacle."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        p = self.params
        if self.shape == "ellipse":
            return (pts[:, 0] / p["a"]) ** 2 + (pts[:, 1] / p["b"]) ** 2 < 1.0
        if self.shape == "circle":
            return np.linalg.norm(pts - self.centre, axis=1) < p["a"]
        if self.shape == "sphere":
            return np.linalg.norm(pts, axis=1) < p["r"]
        if self.shape == "ellipsoid":
            return (pts[:, 0] / p["a"]) ** 2 + (pts[:, 1] / p["b"]) ** 2 + (pts[:, 2] / p["c"]) ** 2 < 1.0
        if self.shape == "cube":
            return np.all(np.abs(pts) < p["s"], axis=1)
        if self.shape == "triangle":
            return _polygon_inside(np.asarray(p["vertices"], float), pts)
        if self.shape == "kite":
            t = np.linspace(0.0, 2.0 * np.pi, 2048, endpoint=False)
            return _polygon_inside(_kite(t), pts)
        raise ValueError(f"unknown shape {self.shape!r}")

    def sample_interior(self, rng: np.random.Generator, n: int, shrink: float = _SHRINK) -> np.ndarray:
        """Uniform points in the body shrunk by ``shrink`` toward its centre."""
        c = self.centre
        lo, hi = self.nodes.min(axis=0), self.nodes.max(axis=0)
        lo, hi = c + shrink * (lo - c), c + shrink * (hi - c)
        out = np.zeros((0, self.dim))
        while len(out) < n:
            cand = rng.uniform(lo, hi, size=(max(2 * n, 16), self.dim))
            ok = self.inside(c + (cand - c) / shrink)
            out = np.vstack([out, cand[ok]])
        return out[:n]

    def to_dict(self) -> dict:
        return {"dim": self.dim, "shape": self.shape, "params": self.params, "M": self.M}


def _kite(t):
    a, b, c = _KITE
    return np.c_[a + np.cos(t) + b * np.cos(2 * t), c * np.sin(t)]


def make_boundary(shape: str, M: int, **params) -> BoundaryMesh:
    """Boundary mesh with ``M`` nodes.

    2D shapes: ``ellipse(a, b)``, ``kite``, ``triangle(vertices)`` and
    ``circle(a, center)`` use ``M`` uniform parameter values in ``[0, 2 pi)``;
    the triangle is sampled uniformly in arc length. 3D shapes:
    ``sphere(r)`` and ``ellipsoid(a, b, c)`` use a Fibonacci spiral;
    ``cube(s)`` (the cube ``[-s, s]^3``) puts an ``n x n`` grid of cell
    centres on each face and requires ``M = 6 n^2``.
    """
    if M < 1:
        raise ValueError("M must be positive")
    t = np.linspace(0.0, 2.0 * np.pi, M, endpoint=False)
    if shape == "ellipse":
        a, b = params.setdefault("a", 2.0), params.setdefault("b", 1.0)
        return BoundaryMesh(2, np.c_[a * np.cos(t), b * np.sin(t)], shape, params)
    if shape == "circle":
        a = params.setdefault("a", 1.0)
        c = np.asarray(params.setdefault("center", [0.0, 0.0]), float)
        params["center"] = c.tolist()
        return BoundaryMesh(2, c + a * np.c_[np.cos(t), np.sin(t)], shape, params)
    if shape == "kite":
        return BoundaryMesh(2, _kite(t), shape, params)
    if shape == "triangle":
        V = np.asarray(params.setdefault("vertices", [[-1.0, 0.0], [1.0, -1.0], [1.0, 1.0]]), float)
        params["vertices"] = V.tolist()
        E = np.roll(V, -1, axis=0) - V
        lengths = np.linalg.norm(E, axis=1)
        s = t / (2.0 * np.pi) * lengths.sum()
        cum = np.r_[0.0, np.cumsum(lengths)]
        i = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, 2)
        return BoundaryMesh(2, V[i] + E[i] * ((s - cum[i]) / lengths[i])[:, None], shape, params)
    if shape == "sphere":
        r = params.setdefault("r", 1.0)
        return BoundaryMesh(3, r * _fibonacci_sphere(M), shape, params)
    if shape == "ellipsoid":
        a, b, c = (params.setdefault(k, v) for k, v in (("a", 1.0), ("b", 1.0), ("c", 1.0)))
        return BoundaryMesh(3, _fibonacci_sphere(M) * np.array([a, b, c]), shape, params)
    if shape == "cube":
        s = params.setdefault("s", 1.0)
        n = int(round(math.sqrt(M / 6)))
        if 6 * n * n != M:
            raise ValueError("cube meshes need M = 6 n^2")
        g = -s + (np.arange(n) + 0.5) * 2 * s / n
        u, v = (a.ravel() for a in np.meshgrid(g, g, indexing="ij"))
        faces = []
        for axis in range(3):
            for sign in (-1.0, 1.0):
                f = np.empty((n * n, 3))
                f[:, axis] = sign * s
                others = [i for i in range(3) if i != axis]
                f[:, others[0]], f[:, others[1]] = u, v
                faces.append(f)
        return BoundaryMesh(3, np.vstack(faces), shape, params)
    raise ValueError(f"unknown shape {shape!r}")


def svd_min(design, b, w_min: float = 1e-12):
    """Coefficients ``c`` minimizing ``||b + design c||`` by truncated SVD.

    Singular values of ``design / sqrt(M)`` below ``w_min`` are discarded,
    which gives the minimal-norm solution for rank-deficient designs.
    """
    if w_min < 0:
        raise ValueError("w_min must be nonnegative")
    A = np.asarray(design, dtype=complex)
    b = np.asarray(b, dtype=complex)
    scale = math.sqrt(A.shape[0])
    U, s, Vh = np.linalg.svd(A / scale, full_matrices=False)
    keep = (s >= w_min) & (s > 0)
    proj = (U[:, keep].conj().T @ b) / scale
    return -(Vh[keep].conj().T @ (proj / s[keep]))


@dataclass
class MrcParams:
    L: int = 5
    J: int = 1
    eps: float = 1e-4
    N_max: int = 6000
    w_min: float = 1e-12
    shrink: float = _SHRINK

    def __post_init__(self):
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if self.L < 0 or self.J < 1 or self.N_max < 0:
            raise ValueError("invalid L, J or N_max")

    @classmethod
    def defaults(cls, dim: int) -> "MrcParams":
        """2D: eight centres per iteration. 3D: eighty monopoles in the body shrunk by half."""
        return cls(J=8) if dim == 2 else cls(L=0, J=80, shrink=0.5)


@dataclass
class MrcSolution:
    """Accumulated multipole expansion of the scattered field."""

    k: float
    alpha: np.ndarray
    dim: int
    L: int
    centres: np.ndarray
    coeffs: np.ndarray
    r_min: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)
    mesh: BoundaryMesh | None = None

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "alpha": np.asarray(self.alpha).tolist(),
            "dim": self.dim,
            "L": self.L,
            "r_min": self.r_min,
            "iterations": self.iterations,
            "converged": self.converged,
            "sources": [
                {"x": x.tolist(), "coeffs_re": c.real.tolist(), "coeffs_im": c.imag.tolist()}
                for x, c in zip(self.centres, self.coeffs)
            ],
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def from_dict(cls, d: dict) -> "MrcSolution":
        src = d["sources"]
        dim = d["dim"]
        centres = np.array([s["x"] for s in src], float).reshape(-1, dim)
        coeffs = np.array([np.add(s["coeffs_re"], 1j * np.asarray(s["coeffs_im"])) for s in src], complex)
        return cls(d["k"], np.asarray(d["alpha"]), dim, d["L"], centres, coeffs.reshape(len(src), -1),
                   d["r_min"], d["iterations"], d["converged"])


def _hankel_orders(L: int, x: np.ndarray) -> np.ndarray:
    """``H^(1)_l(x)`` for ``l = 0..L`` by upward recurrence (stable for H)."""
    H = np.empty(x.shape + (L + 1,), dtype=complex)
    H[..., 0] = special.hankel1(0, x)
    if L >= 1:
        H[..., 1] = special.hankel1(1, x)
    for l in range(1, L):
        H[..., l + 1] = (2.0 * l / x) * H[..., l] - H[..., l - 1]
    return H


def _basis_2d(points, centres, k, L):
    """Values of ``H_l(k|x - x_j|) exp(i l theta_j)``; shape (P, J, 2L+1)."""
    d = points[:, None, :] - centres[None, :, :]
    r = np.hypot(d[..., 0], d[..., 1])
    e = (d[..., 0] + 1j * d[..., 1]) / r
    H = _hankel_orders(L, k * r)
    ls = np.arange(-L, L + 1)
    sign = (-1.0) ** np.arange(1, L + 1)
    Hfull = np.concatenate([(H[..., 1:] * sign)[..., ::-1], H], axis=-1)
    return Hfull * e[..., None] ** ls


def _lm(L):
    return [(l, m) for l in range(L + 1) for m in range(-l, l + 1)]


def _basis_3d(points, centres, k, L):
    """Values of ``Y_lm(direction) h_l(k|x - x_j|)``; shape (P, J, (L+1)^2)."""
    d = points[:, None, :] - centres[None, :, :]
    r = np.linalg.norm(d, axis=-1)
    theta = np.arccos(np.clip(d[..., 2] / r, -1.0, 1.0))
    phi = np.arctan2(d[..., 1], d[..., 0])
    cols = []
    hl = {l: sph_hankel_norm(l, k * r) for l in range(L + 1)}
    for l, m in _lm(L):
        cols.append(sph_harmonic(l, m, theta, phi) * hl[l])
    return np.stack(cols, axis=-1)


def _basis(dim, points, centres, k, L):
    return (_basis_2d if dim == 2 else _basis_3d)(points, centres, k, L)


def _unit(alpha, dim):
    a = np.asarray(alpha, dtype=float).reshape(-1)
    if a.size != dim or not np.isclose(np.linalg.norm(a), 1.0, atol=1e-9):
        raise ValueError("alpha must be a unit vector of the mesh dimension")
    return a


def mrc_solve(mesh: BoundaryMesh, k: float, alpha, params: MrcParams | None = None, seed: int = 0,
              incident=None) -> MrcSolution:
    """Iterate the random multi-point fit until ``r_min <= eps`` or ``N_max`` iterations.

    ``incident`` overrides the boundary values of the incident field (default
    ``exp(i k alpha . x)``); the scattered field cancels it on the boundary.
    """
    if not k > 0:
        raise ValueError("k must be positive")
    params = params or MrcParams.defaults(mesh.dim)
    alpha = _unit(alpha, mesh.dim)
    rng = np.random.default_rng(seed)
    T = mesh.nodes
    g = np.exp(1j * k * T @ alpha) if incident is None else np.asarray(incident, complex).copy()
    norm = lambda v: float(np.sqrt(np.mean(np.abs(v) ** 2)))
    r = norm(g)
    history = [r]
    centres, coeffs = [], []
    n = 0
    while r > params.eps and n < params.N_max:
        n += 1
        X = mesh.sample_interior(rng, params.J, params.shrink)
        B = _basis(mesh.dim, T, X, k, params.L)
        A = B.reshape(len(T), -1)
        c = svd_min(A, g, params.w_min)
        g_new = g + A @ c
        r_new = norm(g_new)
        if r_new <= r:
            g, r = g_new, r_new
            centres.append(X)
            coeffs.append(c.reshape(params.J, -1))
        history.append(r)
    nb = (2 * params.L + 1) if mesh.dim == 2 else (params.L + 1) ** 2
    C = np.vstack(coeffs) if coeffs else np.zeros((0, nb), complex)
    Xs = np.vstack(centres) if centres else np.zeros((0, mesh.dim))
    return MrcSolution(k, alpha, mesh.dim, params.L, Xs, C, r, n, r <= params.eps, history, mesh)


def mrc_eval(sol: MrcSolution, points) -> np.ndarray:
    """Scattered field of the expansion at exterior points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if sol.mesh is not None and np.any(sol.mesh.inside(pts)):
        raise ValueError("evaluation points must lie outside the obstacle")
    if len(sol.centres) == 0:
        return np.zeros(len(pts), dtype=complex)
    B = _basis(sol.dim, pts, sol.centres, sol.k, sol.L)
    return np.einsum("pjn,jn->p", B, sol.coeffs)


def mrc_far_field(sol: MrcSolution, directions) -> np.ndarray:
    """Far-field amplitude of the expansion.

    2D: ``u_s ~ A exp(ikr)/sqrt(r)``, using the large-argument form of
    ``H_l``. 3D: ``u_s ~ A exp(ikr)/r``, using ``h_l(kr) ~ exp(ikr)/(kr)``.
    ``directions`` are unit vectors; in 2D plain angles are also accepted.
    """
    dirs = np.asarray(directions, dtype=float)
    if sol.dim == 2 and dirs.ndim == 1:
        dirs = np.c_[np.cos(dirs), np.sin(dirs)]
    dirs = np.atleast_2d(dirs)
    if len(sol.centres) == 0:
        return np.zeros(len(dirs), dtype=complex)
    shift = np.exp(-1j * sol.k * dirs @ sol.centres.T)  # (P, J)
    if sol.dim == 2:
        ls = np.arange(-sol.L, sol.L + 1)
        ang = np.arctan2(dirs[:, 1], dirs[:, 0])
        modes = (-1j) ** ls * np.exp(1j * np.outer(ang, ls))  # (P, n)
        pref = math.sqrt(2.0 / (math.pi * sol.k)) * np.exp(-1j * math.pi / 4)
        return pref * np.einsum("pj,pn,jn->p", shift, modes, sol.coeffs)
    theta = np.arccos(np.clip(dirs[:, 2], -1.0, 1.0))
    phi = np.arctan2(dirs[:, 1], dirs[:, 0])
    Y = np.stack([sph_harmonic(l, m, theta, phi) for l, m in _lm(sol.L)], axis=-1)
    return np.einsum("pj,pn,jn->p", shift, Y, sol.coeffs) / sol.k


def write_far_field_csv(path, directions, values, dim: int = 2) -> None:
    """Far field as CSV: angle(s) then ``A_re``, ``A_im``."""
    dirs = np.asarray(directions, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if dim == 2:
            ang = dirs if dirs.ndim == 1 else np.arctan2(dirs[:, 1], dirs[:, 0])
            w.writerow(["angle", "A_re", "A_im"])
            for a, v in zip(ang, values):
                w.writerow([repr(float(a)), repr(float(v.real)), repr(float(v.imag))])
        else:
            w.writerow(["theta", "phi", "A_re", "A_im"])
            for d, v in zip(np.atleast_2d(dirs), values):
                w.writerow([repr(float(np.arccos(d[2]))), repr(float(np.arctan2(d[1], d[0]))),
                            repr(float(v.real)), repr(float(v.imag))])
