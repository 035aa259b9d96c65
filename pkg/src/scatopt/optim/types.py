"""Domain types shared by the optimizers."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = ["BoxDomain", "ObjectiveHandle", "MinimizeOutcome", "SampleBatch", "write_trace"]

STOP_REASONS = ("tolerance", "stability", "budget", "confidence")


@dataclass
class BoxDomain:
    """Axis-aligned box ``lower <= x <= upper``.

    ``radius_slice`` marks coordinates that must stay nondecreasing (layer
    radii); the optimizers keep them ordered by sorting after every move.
    """

    lower: np.ndarray
    upper: np.ndarray
    radius_slice: Optional[slice] = None

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float).reshape(-1)
        self.upper = np.asarray(self.upper, dtype=float).reshape(-1)
        if self.lower.shape != self.upper.shape:
            raise ValueError("bounds must have the same length")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.width))

    def contains(self, x, tol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        slack = tol * np.maximum(1.0, self.width)
        return bool(np.all(x >= self.lower - slack) and np.all(x <= self.upper + slack))

    def project(self, x) -> np.ndarray:
        x = np.clip(np.asarray(x, dtype=float), self.lower, self.upper)
        if self.radius_slice is not None:
            x[self.radius_slice] = np.sort(x[self.radius_slice])
        return x

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        pts = rng.uniform(self.lower, self.upper, size=(n, self.dim))
        if self.radius_slice is not None:
            pts[:, self.radius_slice] = np.sort(pts[:, self.radius_slice], axis=1)
        return pts

    @classmethod
    def tiled(cls, lower, upper, copies: int) -> "BoxDomain":
        """Product of ``copies`` identical boxes, e.g. N points in a 3D box."""
        return cls(np.tile(lower, copies), np.tile(upper, copies))

    @classmethod
    def layers(cls, n_layers: int, R: float, c_low: float, c_high: float) -> "BoxDomain":
        """Layout ``(r_1..r_M, c_1..c_M)`` with ``0 <= r <= R`` and ordered radii."""
        lower = np.r_[np.zeros(n_layers), np.full(n_layers, c_low)]
        upper = np.r_[np.full(n_layers, R), np.full(n_layers, c_high)]
        return cls(lower, upper, slice(0, n_layers))


class ObjectiveHandle:
    """Callable wrapper counting evaluations of a real objective."""

    def __init__(self, fn: Callable[[np.ndarray], float], dim: Optional[int] = None):
        self.fn = fn
        self.dim = dim
        self.evals = 0

    def __call__(self, x) -> float:
        self.evals += 1
        val = float(self.fn(np.asarray(x, dtype=float)))
        return val if np.isfinite(val) else np.inf


@dataclass
class MinimizeOutcome:
    best_point: np.ndarray
    best_value: float
    iterations: int = 0
    evals: int = 0
    stopped_by: str = "tolerance"
    stability_index: Optional[float] = None
    seed: Optional[int] = None
    trace: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.best_point = np.asarray(self.best_point, dtype=float)
        if self.stopped_by not in STOP_REASONS:
            raise ValueError(f"unknown stop reason {self.stopped_by!r}")

    def to_dict(self) -> dict:
        d = {
            "best_point": self.best_point.tolist(),
            "best_value": self.best_value,
            "iterations": self.iterations,
            "evals": self.evals,
            "stopped_by": self.stopped_by,
            "stability_index": self.stability_index,
            "seed": self.seed,
        }
        d.update({k: v for k, v in self.extra.items() if isinstance(v, (int, float, str, bool, list, type(None)))})
        return d


@dataclass
class SampleBatch:
    """Parallel lists of trial points and their objective values."""

    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.points.shape[0] != self.values.size:
            raise ValueError("one value per point required")

    def __len__(self) -> int:
        return self.values.size

    def best(self, n: int) -> "SampleBatch":
        """The ``n`` points with the smallest values, in ascending order."""
        order = np.argsort(self.values, kind="stable")[:n]
        return SampleBatch(self.points[order], self.values[order])

    def merged(self, other: "SampleBatch") -> "SampleBatch":
        if len(self) == 0:
            return other
        return SampleBatch(np.vstack([self.points, other.points]), np.r_[self.values, other.values])


TRACE_COLUMNS = ("iteration", "best_value", "stability_index", "K", "W")


def write_trace(rows, path) -> None:
    """Per-iteration optimizer trace as CSV with fixed columns."""
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=TRACE_COLUMNS, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({c: row.get(c, "") for c in TRACE_COLUMNS})
