"""End-to-end acceptance checks, one test (or parameter set) per criterion.

Each check records a one-line verdict that the terminal summary prints as
``criterion N: PASS|FAIL``. Checks known not to reach their tolerance are
marked ``xfail(strict=True)`` with the full tolerance kept in the assertion.
"""

import csv
import io
import math
import time
from importlib import resources

import numpy as np
import pytest

from acceptance_log import LOG
from oracles import circle_field_dirichlet, disc_field, ode_phase_shift
from scatopt.amplitude import AmplitudeSource
from scatopt.forward import (
    TABLE_INCLUSIONS,
    RadialProfile,
    circle_amplitude,
    experiment1_pairs,
    layered_circle_field,
    phase_shifts,
    scattering_matrix,
    subsurface_data,
    well,
)
from scatopt.inverse import (
    PotentialTarget,
    SubsurfaceProblem,
    invert_layers,
    invert_potential,
    invert_subsurface,
    synthetic_target,
)
from scatopt.lsm import VARIANTS, build_far_matrix, lsm_scan
from scatopt.mrc import MrcParams, make_boundary, mrc_eval, mrc_solve
from scatopt.optim import BoxDomain, HsdParams, IrrsParams, MslmParams
from scatopt.sfm import Circle, kirchhoff_amplitude, recover_support, support_robin

pytestmark = pytest.mark.slow


def match_error(found, truth_z, truth_v):
    """Largest coordinate or intensity gap to the nearest recovered inclusion."""
    if len(found) == 0:
        return math.inf
    i = np.argmin(np.linalg.norm(found.z - truth_z, axis=1))
    return float(max(np.max(np.abs(found.z[i] - truth_z)), abs(found.v[i] - truth_v)))


# ---- 1, 2: subsurface -------------------------------------------------------

def test_c01_exact_subsurface_recovery():
    prob = SubsurfaceProblem.experiment(subsurface_data(TABLE_INCLUSIONS, experiment1_pairs()))
    t = time.time()
    found, out = invert_subsurface(prob, HsdParams(), seed=0, restarts=3)
    elapsed = time.time() - t
    err = max(match_error(found, z, v) for z, v in zip(TABLE_INCLUSIONS.z, TABLE_INCLUSIONS.v))
    ok = len(found) == 6 and err <= 1e-2 and elapsed <= 300
    LOG.record(1, ok, f"{len(found)} inclusions, max error {err:.2e}, {elapsed:.0f} s")
    assert ok


def test_c02_noisy_subsurface_recovery():
    data = subsurface_data(TABLE_INCLUSIONS, experiment1_pairs(), 0.05, seed=7)
    found, _ = invert_subsurface(SubsurfaceProblem.experiment(data), HsdParams(), seed=0)
    # the inclusions listed in the noisy identification table
    errs = [match_error(found, TABLE_INCLUSIONS.z[i], TABLE_INCLUSIONS.v[i]) for i in (0, 2, 4, 5)]
    hits = sum(e <= 0.1 for e in errs)
    LOG.record(2, hits >= 3, f"{hits} of 4 listed inclusions within 0.1, errors {np.round(errs, 3).tolist()}")
    assert hits >= 3


# ---- 3, 4, 5: support function method ----------------------------------------

def test_c03_kirchhoff_ratio_table():
    text = resources.files("scatopt").joinpath("data", "kirchhoff_ratios.csv").read_text()
    rows = list(csv.DictReader(io.StringIO(text)))
    shape = Circle((6.0, 2.0), 1.0)
    worst = 0.0
    for j, row in enumerate(rows):
        th, be = (24 - j) * math.pi / 24, j * math.pi / 24
        ao, ai = np.array([math.cos(th), math.sin(th)]), np.array([math.cos(be), math.sin(be)])
        for k, key in ((1.0, "k1"), (5.0, "k5")):
            q = kirchhoff_amplitude(shape, ao, ai, k, l=(1.0, 0.0)) / circle_amplitude(1.0, (6.0, 2.0), k, ao, ai)
            worst = max(worst, abs(q.real - float(row[key + "_re"])), abs(q.imag - float(row[key + "_im"])))
    ok = len(rows) == 13 and worst <= 5e-5
    LOG.record(3, ok, f"13 rows x 2 frequencies, max deviation {worst:.1e}")
    assert ok


def test_c04_sfm_localization():
    shape = Circle((6.0, 2.0), 1.0)
    S = recover_support(AmplitudeSource.circle(5.0, 1.0, (6.0, 2.0)), 40)
    err = float(np.max(np.abs(S.values - [shape.support(l) for l in S.directions])))
    LOG.record(4, err <= 0.05, f"max support error {err:.4f}")
    assert err <= 0.05


ROBIN_H = (0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0)


@pytest.mark.parametrize("h", [
    pytest.param(h, marks=pytest.mark.xfail(strict=True, reason="phase regression bias 0.387 at h=5")) if h == 5.0
    else h
    for h in ROBIN_H
])
def test_c05_sfm_robin(h):
    d = support_robin(AmplitudeSource.circle(3.0, 1.0, (0.0, 0.0), "robin", h), (1.0, 0.0)).d
    err = abs(d + 1.0)
    LOG.record(5, err <= 0.35, f"h={h:g}: {err:.3f}")
    assert err <= 0.35


# ---- 6, 7: modified Rayleigh conjecture --------------------------------------

# Shape parameters and solver settings; the criterion leaves J free.
# Corner singularities of the triangle need centres close to the vertices.
MRC_SHAPES = {
    "ellipse": ({"a": 2.0, "b": 1.0}, {"J": 8}),
    "kite": ({}, {"J": 32}),
    "triangle": ({}, {"J": 16, "shrink": 0.99}),
    "thin ellipse": ({"a": 0.1, "b": 1.0}, {"J": 48}),
}


def mrc_case(name, k, axis):
    return pytest.param(name, k, axis, id=f"{name}-k{k:g}-{'x' if axis == 0 else 'y'}")


@pytest.mark.parametrize("name,k,axis", [mrc_case(n, k, a) for n in MRC_SHAPES for k in (1.0, 5.0) for a in (0, 1)])
def test_c06_mrc_2d(name, k, axis):
    params, settings = MRC_SHAPES[name]
    mesh = make_boundary("ellipse" if "ellipse" in name else name, 720, **params)
    alpha = (1.0, 0.0) if axis == 0 else (0.0, 1.0)
    sol = mrc_solve(mesh, k, alpha, MrcParams(**settings), seed=0)
    ok = sol.r_min <= 1e-4
    LOG.record(6, ok, f"{name} k={k:g} alpha={alpha}: {sol.r_min:.2e} after {sol.iterations}")
    assert ok


def test_c07_mrc_disc_and_sphere():
    sol = mrc_solve(make_boundary("circle", 720, a=1.0), 1.0, (1.0, 0.0), MrcParams(J=4), seed=0)
    t = np.linspace(0.0, 2.0 * np.pi, 128, endpoint=False)
    ring = 2.0 * np.c_[np.cos(t), np.sin(t)]
    exact = circle_field_dirichlet(1.0, 1.0, ring)
    rel = float(np.linalg.norm(mrc_eval(sol, ring) - exact) / np.linalg.norm(exact))
    sph = mrc_solve(make_boundary("sphere", 450), 1.0, (0.0, 0.0, 1.0),
                    MrcParams(L=0, J=80, eps=2e-4, N_max=3, shrink=0.5), seed=0)
    ok = rel <= 1e-2 and sph.r_min <= 2e-4 and sph.iterations <= 3
    LOG.record(7, ok, f"disc field error {rel:.1e}; sphere residual {sph.r_min:.2e} in {sph.iterations} iterations")
    assert ok


# ---- 8, 9: potential scattering ----------------------------------------------

def test_c08_potential_inversion():
    q3 = well("q3")
    target = PotentialTarget(2.5, phase_shifts(q3, 2.5, 31), 31)
    prof, out = invert_potential(target, BoxDomain.layers(2, 10.0, -20.0, 0.0), IrrsParams(), seed=0)
    r = np.linspace(0.0, 10.0, 2001)
    away = np.abs(r - 8.0) > 1e-2
    gap = float(np.max(np.abs(prof(r[away]) - q3(r[away]))))
    edge = prof.active_shells()[-1][1]
    verdict, index = out.extra["verdict"], out.stability_index
    ok = gap <= 1e-2 and abs(edge - 8.0) <= 1e-2 and index <= 0.02 and verdict == "stable"
    LOG.record(8, ok, f"max value gap {gap:.1e}, edge {edge:.6f}, index {index:.4f}, {verdict}")
    assert ok


def test_c09_phase_shift_oracle():
    worst = 0.0
    for name in ("q1", "q3"):
        q = well(name)
        got = phase_shifts(q, 1.0, 30).shifts
        for l in range(31):
            d = got[l] - ode_phase_shift(q.values[0], q.breakpoints[0], 1.0, l)
            worst = max(worst, abs((d + math.pi / 2) % math.pi - math.pi / 2))
    LOG.record(9, worst <= 1e-6, f"max deviation {worst:.1e}")
    assert worst <= 1e-6


# ---- 10, 11, 12: layered cylinder and LSM -------------------------------------

def test_c10_layered_forward():
    ang = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
    vac = layered_circle_field(RadialProfile([0.3, 0.6], [1.0, 1.0], 1.0, 1.0), 5.0, 1.0, ang)
    e0 = float(np.linalg.norm(vac.values - np.exp(5j * np.cos(ang))))
    got = layered_circle_field(RadialProfile([0.7], [4.0], 1.2, 1.0), 3.0, 1.2, ang).values
    exact = disc_field(4.0, 0.7, 3.0, 1.2, ang, l_max=80)
    e1 = float(np.linalg.norm(got - exact) / np.linalg.norm(exact))
    prof = RadialProfile([0.3, 0.6], [0.49, 9.0], 1.0, 1.0)
    e2 = max(float(np.max(np.abs(np.abs(scattering_matrix(prof, k0, 60)) - 1))) for k0 in (3.0, 6.5, 10.0))
    ok = e0 <= 1e-10 and e1 <= 1e-8 and e2 <= 1e-10
    LOG.record(10, ok, f"vacuum {e0:.1e}, disc {e1:.1e}, unitarity {e2:.1e}")
    assert ok


def test_c11_lsm_localization():
    grid = {"x0": 0.0, "x1": 20.0, "y0": 0.0, "y1": 20.0, "nx": 64, "ny": 64}
    ok, parts = True, []
    for k in (1.0, 5.0):
        F = build_far_matrix(AmplitudeSource.circle(k, 1.0, (10.0, 15.0)), 128)
        for v in VARIANTS:
            dist = float(np.linalg.norm(lsm_scan(F, grid, v).argmin() - [10.0, 15.0]))
            ok &= dist < 1.0
            parts.append(f"k={k:g} {v} {dist:.2f}")
    LOG.record(11, ok, "argmin distance to centre: " + ", ".join(parts))
    assert ok


def test_c12_layered_inversion():
    truth = RadialProfile([0.4, 0.8], [2.0, 1.5], 1.0, 1.0)
    target = synthetic_target(truth, [3.0, 6.5, 10.0], 1.0)
    prof, out = invert_layers(target, BoxDomain.layers(2, 1.0, 1.0, 3.0), MslmParams(L=100, gamma=0.1, max_iter=15),
                              seed=0)
    shells = prof.active_shells()
    got = np.array([[s[1], s[2]] for s in shells])
    want = np.array([[0.4, 2.0], [0.8, 1.5]])
    err = float(np.max(np.abs(got - want))) if got.shape == want.shape else math.inf
    ok = err <= 0.05 and out.stopped_by == "confidence" and out.iterations <= 15
    LOG.record(12, ok, f"max parameter error {err:.1e}, stopped by {out.stopped_by} at iteration {out.iterations}")
    assert ok
