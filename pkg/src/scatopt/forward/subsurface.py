"""Point-inclusion (Born) model for surface measurements of buried scatterers."""

from __future__ import annotations

import numpy as np

from .models import InclusionSet, SourceDetectorPairs, SubsurfaceData

__all__ = [
    "helmholtz_green",
    "pair_green",
    "multiplicative_noise",
    "subsurface_data",
    "EXPERIMENT_BOX",
    "TABLE_INCLUSIONS",
    "experiment1_pairs",
    "experiment2_pairs",
]

# -a<x1<a, -b<x2<b, 0<x3<c with a=2, b=1, c=1
EXPERIMENT_BOX = (np.array([-2.0, -1.0, 0.0]), np.array([2.0, 1.0, 1.0]))

TABLE_INCLUSIONS = InclusionSet(
    [
        [1.640, -0.510, 0.520],
        [-1.430, -0.500, 0.580],
        [1.220, 0.570, 0.370],
        [1.410, 0.230, 0.740],
        [-0.220, 0.470, 0.270],
        [-1.410, 0.230, 0.174],
    ],
    [1.200, 0.500, 0.700, 0.610, 0.700, 0.600],
)


def helmholtz_green(x, y, k: float):
    """Outgoing free-space Green's function ``exp(ik|x-y|) / (4 pi |x-y|)``.

    Broadcasts over leading dimensions; the last axis holds coordinates.
    """
    r = np.linalg.norm(np.asarray(x, float) - np.asarray(y, float), axis=-1)
    if np.any(r == 0):
        raise ValueError("coincident points in Green's function")
    return np.exp(1j * k * r) / (4 * np.pi * r)


def pair_green(pairs: SourceDetectorPairs, z) -> np.ndarray:
    """Matrix ``G[j, m] = g(x_j, z_m) g(y_j, z_m)`` (pairs x inclusions)."""
    z = np.asarray(z, dtype=float).reshape(-1, 3)
    gx = helmholtz_green(pairs.x[:, None, :], z[None, :, :], pairs.k)
    gy = helmholtz_green(pairs.y[:, None, :], z[None, :, :], pairs.k)
    return gx * gy


def multiplicative_noise(values, level: float, rng: np.random.Generator):
    """Return ``values * (1 + (0.5 - zeta) * level)`` with ``zeta ~ U[0, 1]`` per entry."""
    values = np.asarray(values)
    if level < 0:
        raise ValueError("noise level must be nonnegative")
    zeta = rng.uniform(0.0, 1.0, size=values.shape)
    return values * (1.0 + (0.5 - zeta) * level)


def subsurface_data(incl: InclusionSet, pairs: SourceDetectorPairs, noise_level: float = 0.0, seed: int = 0) -> SubsurfaceData:
    """Synthetic reduced data ``f_j = sum_m G_j(z_m) v_m``, optionally with noise."""
    if len(incl):
        f = pair_green(pairs, incl.z) @ incl.v
    else:
        f = np.zeros(len(pairs), dtype=complex)
    if noise_level > 0:
        f = multiplicative_noise(f, noise_level, np.random.default_rng(seed))
    return SubsurfaceData(f, pairs, noise_level)


def experiment1_pairs(k: float = 5.0) -> SourceDetectorPairs:
    """12 sources above the search area and 21 detectors on three lines."""
    sources = [(-1.667 + 0.667 * i, -0.5 + 1.0 * j, 0.0) for j in range(2) for i in range(6)]
    detectors = [(-2.0 + 0.667 * i, -1.0 + 1.0 * j, 0.0) for j in range(3) for i in range(7)]
    return SourceDetectorPairs.all_pairs(sources, detectors, k)


def experiment2_pairs(k: float = 5.0) -> SourceDetectorPairs:
    """8 sources on the line x2=1.5 and 22 detectors on x2 in {1, 2}."""
    sources = [(-1.75 + 0.5 * i, 1.5, 0.0) for i in range(8)]
    detectors = [(-2.0 + 0.4 * i, 1.0 + 1.0 * j, 0.0) for j in range(2) for i in range(11)]
    return SourceDetectorPairs.all_pairs(sources, detectors, k)
