"""Data containers shared by the forward models and the inversion drivers."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class RadialProfile:
    """Piecewise-constant radial function.

    ``values[m]`` holds on ``breakpoints[m-1] <= r < breakpoints[m]`` with an
    implicit inner radius 0. Beyond the last breakpoint the function equals
    ``background`` (0 for potentials, 1 for refractive indices).
    """

    breakpoints: np.ndarray
    values: np.ndarray
    outer_radius: float
    background: float = 0.0

    def __post_init__(self):
        self.breakpoints = np.asarray(self.breakpoints, dtype=float).reshape(-1)
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        self.outer_radius = float(self.outer_radius)
        if self.breakpoints.shape != self.values.shape:
            raise ValueError("breakpoints and values must have the same length")
        if np.any(np.diff(self.breakpoints) < 0):
            raise ValueError("breakpoints must be nondecreasing")
        if self.breakpoints.size and (self.breakpoints[0] < 0 or self.breakpoints[-1] > self.outer_radius * (1 + 1e-12)):
            raise ValueError("breakpoints must lie in [0, outer_radius]")

    @property
    def n_layers(self) -> int:
        return self.breakpoints.size

    @classmethod
    def from_vector(cls, vec, outer_radius: float, background: float = 0.0) -> "RadialProfile":
        """Build from the optimizer layout ``(r_1..r_M, c_1..c_M)``; radii are sorted."""
        vec = np.asarray(vec, dtype=float)
        m = vec.size // 2
        radii = np.clip(np.sort(vec[:m]), 0.0, outer_radius)
        return cls(radii, vec[m:], outer_radius, background)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.breakpoints, self.values])

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        idx = np.searchsorted(self.breakpoints, r, side="right")
        vals = np.append(self.values, self.background)
        return vals[idx]

    def shells(self, tol: float = 0.0):
        """Nonempty shells as ``(r_inner, r_outer, value)`` tuples, innermost first."""
        out = []
        inner = 0.0
        for r, c in zip(self.breakpoints, self.values):
            if r - inner > tol:
                out.append((inner, float(r), float(c)))
                inner = float(r)
        return out

    def active_shells(self, tol: float = 0.0):
        """:meth:`shells` without trailing shells equal to the background."""
        out = self.shells(tol)
        while out and out[-1][2] == self.background:
            out.pop()
        return out

    def to_dict(self) -> dict:
        return {
            "breakpoints": self.breakpoints.tolist(),
            "values": self.values.tolist(),
            "outer_radius": self.outer_radius,
            "background": self.background,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RadialProfile":
        return cls(d["breakpoints"], d["values"], d["outer_radius"], d.get("background", 0.0))


@dataclass
class InclusionSet:
    """Point inclusions: positions ``z`` (M x 3) and intensities ``v`` (M,)."""

    z: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float).reshape(-1, 3)
        self.v = np.asarray(self.v, dtype=float).reshape(-1)
        if self.z.shape[0] != self.v.size:
            raise ValueError("need one intensity per position")
        if np.any(self.v < 0):
            raise ValueError("intensities must be nonnegative")

    def __len__(self) -> int:
        return self.v.size

    def sorted_by_intensity(self) -> "InclusionSet":
        order = np.argsort(-self.v, kind="stable")
        return InclusionSet(self.z[order], self.v[order])

    def to_dict(self) -> dict:
        return {"items": [{"z": z.tolist(), "v": float(v)} for z, v in zip(self.z, self.v)]}

    @classmethod
    def from_dict(cls, d: dict) -> "InclusionSet":
        items = d["items"]
        if not items:
            return cls(np.zeros((0, 3)), np.zeros(0))
        return cls([it["z"] for it in items], [it["v"] for it in items])


@dataclass
class SourceDetectorPairs:
    """Source/detector positions on the plane ``x3 = 0`` and the wavenumber."""

    x: np.ndarray
    y: np.ndarray
    k: float

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).reshape(-1, 3)
        self.y = np.asarray(self.y, dtype=float).reshape(-1, 3)
        if self.x.shape != self.y.shape:
            raise ValueError("sources and detectors must pair up")
        if np.any(self.x[:, 2] != 0) or np.any(self.y[:, 2] != 0):
            raise ValueError("sources and detectors must lie on x3 = 0")
        if not self.k > 0:
            raise ValueError("wavenumber must be positive")

    def __len__(self) -> int:
        return self.x.shape[0]

    @classmethod
    def all_pairs(cls, sources, detectors, k: float) -> "SourceDetectorPairs":
        """Every source combined with every detector."""
        sources = np.asarray(sources, dtype=float).reshape(-1, 3)
        detectors = np.asarray(detectors, dtype=float).reshape(-1, 3)
        xs = np.repeat(sources, len(detectors), axis=0)
        ys = np.tile(detectors, (len(sources), 1))
        return cls(xs, ys, k)

    def to_dict(self) -> dict:
        return {"pairs": [{"x": a.tolist(), "y": b.tolist()} for a, b in zip(self.x, self.y)], "k": self.k}

    @classmethod
    def from_dict(cls, d: dict) -> "SourceDetectorPairs":
        return cls([p["x"] for p in d["pairs"]], [p["y"] for p in d["pairs"]], d["k"])


@dataclass
class SubsurfaceData:
    """Reduced measurements ``f_j = (u - g) / k^2`` for each source/detector pair."""

    f: np.ndarray
    pairs: SourceDetectorPairs
    noise_level: float = 0.0

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=complex).reshape(-1)
        if self.f.size != len(self.pairs):
            raise ValueError("one measurement per pair required")

    def to_dict(self) -> dict:
        d = self.pairs.to_dict()
        d.update(f_re=self.f.real.tolist(), f_im=self.f.imag.tolist(), noise_level=self.noise_level)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SubsurfaceData":
        f = np.asarray(d["f_re"]) + 1j * np.asarray(d["f_im"])
        return cls(f, SourceDetectorPairs.from_dict(d), d.get("noise_level", 0.0))


@dataclass
class PhaseShiftSet:
    """Fixed-energy phase shifts ``delta_l``, ``l = 0..N``."""

    k: float
    shifts: np.ndarray

    def __post_init__(self):
        self.shifts = np.asarray(self.shifts, dtype=float).reshape(-1)

    @property
    def l_max(self) -> int:
        return self.shifts.size - 1

    @property
    def tail(self) -> float:
        return float(abs(self.shifts[-1]))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["l", "delta"])
            for l, d in enumerate(self.shifts):
                w.writerow([l, repr(float(d))])

    @classmethod
    def read_csv(cls, path, k: float) -> "PhaseShiftSet":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls(k, [float(r["delta"]) for r in rows])


@dataclass
class LayeredFieldSamples:
    """Total field samples on the circle ``|x| = R``."""

    k0: float
    R: float
    angles: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float).reshape(-1)
        self.values = np.asarray(self.values, dtype=complex).reshape(-1)
        if self.angles.shape != self.values.shape:
            raise ValueError("one value per angle required")


def save_json(obj, path) -> None:
    """Write any object exposing ``to_dict`` (or a plain dict) as JSON."""
    data = obj.to_dict() if hasattr(obj, "to_dict") else obj
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True))


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())
