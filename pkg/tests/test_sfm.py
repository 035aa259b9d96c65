import csv
import io
import math
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scatopt.amplitude import AmplitudeSource, FarFieldMatrix, uniform_directions
from scatopt.forward import circle_amplitude
from scatopt.sfm import (
    Circle,
    Ellipse,
    SupportSamples,
    cone_pairs,
    convex_hull_halfplanes,
    kirchhoff_amplitude,
    reconstruct_boundary,
    recover_support,
    support_from_amplitude,
    support_robin,
    write_polygon_json,
)


def unit(t):
    return np.array([math.cos(t), math.sin(t)])


def kirchhoff_source(shape, k):
    return AmplitudeSource(k, fn=lambda ao, ai: kirchhoff_amplitude(shape, ao, ai, k))


# ---- Kirchhoff amplitude ----------------------------------------------------

def kirchhoff_table():
    text = resources.files("scatopt").joinpath("data", "kirchhoff_ratios.csv").read_text()
    return list(csv.DictReader(io.StringIO(text)))


@pytest.mark.parametrize("j", range(13))
def test_kirchhoff_ratio_rows(j):
    row = kirchhoff_table()[j]
    ao, ai = unit((24 - j) * math.pi / 24), unit(j * math.pi / 24)
    shape = Circle((6.0, 2.0), 1.0)
    for k, key in ((1.0, "k1"), (5.0, "k5")):
        q = kirchhoff_amplitude(shape, ao, ai, k, l=(1.0, 0.0)) / circle_amplitude(1.0, (6.0, 2.0), k, ao, ai)
        assert abs(q.real - float(row[key + "_re"])) <= 5e-5
        assert abs(q.imag - float(row[key + "_im"])) <= 5e-5


def test_kirchhoff_backscatter_hand_value():
    # alpha = -alpha' = l: |alpha - alpha'| = 2, d = c.l - a
    A = kirchhoff_amplitude(Circle((1.0, 0.0), 0.5), (-1.0, 0.0), (1.0, 0.0), 2.0)
    assert abs(A - (-0.5 * math.sqrt(2 * 0.5) * np.exp(1j * 2.0 * 2 * 0.5))) < 1e-15


def test_kirchhoff_forward_direction():
    with pytest.raises(ValueError):
        kirchhoff_amplitude(Circle(), (1.0, 0.0), (1.0, 0.0), 1.0)
    assert kirchhoff_amplitude(Circle(), (1.0, 0.0), (1.0, 0.0), 1.0, l=(0.0, 1.0)) == 0


def test_ellipse_support_and_curvature():
    e = Ellipse((1.0, -1.0), 2.0, 1.0)
    assert e.support((1.0, 0.0)) == pytest.approx(1.0 - 2.0)
    assert e.support((0.0, 1.0)) == pytest.approx(-1.0 - 1.0)
    # curvature at the end of the major axis is a / b^2
    assert e.curvature((1.0, 0.0)) == pytest.approx(2.0 / 1.0)
    for t in np.linspace(0, 2 * np.pi, 7):
        l = unit(t)
        s = e.specular_point(l)
        assert ((s[0] - 1) / 2) ** 2 + (s[1] + 1) ** 2 == pytest.approx(1.0)
        assert s @ l == pytest.approx(e.support(l))


def test_cone_pairs_geometry():
    l = unit(0.7)
    ao, ai = cone_pairs(l, np.linspace(-0.7, 0.7, 9))
    assert np.allclose(np.linalg.norm(ao, axis=1), 1.0)
    diff = ai - ao
    assert np.allclose(diff / np.linalg.norm(diff, axis=1)[:, None], l)


# ---- support recovery -------------------------------------------------------

@pytest.mark.parametrize("shape,k", [(Circle((6.0, 2.0), 1.0), 5.0), (Ellipse((-2.0, 3.0), 2.0, 1.0), 3.0)])
def test_support_exact_for_kirchhoff_data(shape, k):
    src = kirchhoff_source(shape, k)
    for t in np.linspace(0, 2 * np.pi, 6, endpoint=False):
        assert support_from_amplitude(src, unit(t)) == pytest.approx(shape.support(unit(t)), abs=1e-5)


@settings(max_examples=15, deadline=None)
@given(st.floats(-8, 8), st.floats(-8, 8), st.floats(0, 2 * math.pi))
def test_support_translation_covariance(c1, c2, t):
    l = unit(t)
    base = support_from_amplitude(kirchhoff_source(Circle((0.0, 0.0), 1.0), 4.0), l)
    moved = support_from_amplitude(kirchhoff_source(Circle((c1, c2), 1.0), 4.0), l)
    assert moved - base == pytest.approx(c1 * l[0] + c2 * l[1], abs=1e-5)


def test_support_from_exact_circle_amplitude_high_frequency():
    src = AmplitudeSource.circle(10.0, 1.0, (3.0, -1.0))
    l = unit(1.0)
    assert abs(support_from_amplitude(src, l) - Circle((3.0, -1.0), 1.0).support(l)) < 0.05


def test_robin_pure_phase_model():
    k, d, h = 3.0, -0.7, 2.0
    C2 = -2 * math.atan(h / k)
    src = AmplitudeSource(k, fn=lambda ao, ai: 0.3 * np.exp(1j * (k * d * np.linalg.norm(ai - ao) + C2)))
    est = support_robin(src, (1.0, 0.0))
    assert est.d == pytest.approx(d, abs=1e-12)
    assert est.h_est == pytest.approx(h, rel=1e-10)
    assert est.fit_rms < 1e-12 and est.reliable


def test_robin_rejects_tiny_grids():
    with pytest.raises(ValueError):
        support_robin(AmplitudeSource.circle(1.0), (1.0, 0.0), n_t=2)


# ---- reconstruction ---------------------------------------------------------

def samples_of(shape, n):
    t = 2 * np.pi * np.arange(n) / n
    return SupportSamples(t, np.array([shape.support(unit(s)) for s in t]))


def test_reconstruct_unit_circle():
    pts = reconstruct_boundary(samples_of(Circle((0.0, 0.0), 1.0), 40))
    # p is constant, so the envelope is exact
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0, rtol=1e-14, atol=0)


def test_reconstruct_shifted_ellipse():
    e = Ellipse((6.0, 2.0), 2.0, 1.0)
    pts = reconstruct_boundary(samples_of(e, 400))
    assert np.max(np.abs(((pts[:, 0] - 6) / 2) ** 2 + (pts[:, 1] - 2) ** 2 - 1)) < 1e-3


def test_reconstruct_needs_uniform_directions():
    with pytest.raises(ValueError):
        reconstruct_boundary(samples_of(Circle(), 6))
    with pytest.raises(ValueError):
        reconstruct_boundary(SupportSamples(np.r_[0.0, np.linspace(1, 6, 9)], np.zeros(10)))


def test_hull_of_square():
    V = convex_hull_halfplanes(SupportSamples([0, np.pi / 2, np.pi, 3 * np.pi / 2], [-1.0, -1.0, -1.0, -1.0]))
    assert len(V) == 4
    assert np.allclose(np.sort(np.abs(V).ravel()), 1.0)
    area = 0.5 * abs(np.dot(V[:, 0], np.roll(V[:, 1], -1)) - np.dot(V[:, 1], np.roll(V[:, 0], -1)))
    assert area == pytest.approx(4.0)
    # counterclockwise
    e1, e2 = V[1] - V[0], V[2] - V[1]
    assert e1[0] * e2[1] - e1[1] * e2[0] > 0


def test_hull_of_circumscribed_16gon():
    V = convex_hull_halfplanes(samples_of(Circle((1.0, 1.0), 1.0), 16))
    assert len(V) == 16
    assert np.allclose(np.linalg.norm(V - 1.0, axis=1), 1 / math.cos(math.pi / 16))


def test_hull_rejects_bad_data():
    with pytest.raises(ValueError):
        convex_hull_halfplanes(SupportSamples([0.0, 0.5, 1.0], [0.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        # x1 >= 1 and x1 <= -1 cannot both hold
        convex_hull_halfplanes(SupportSamples([0, np.pi / 2, np.pi, 3 * np.pi / 2], [1.0, -1.0, 1.0, -1.0]))


def test_samples_io(tmp_path):
    s = samples_of(Circle((6.0, 2.0), 1.0), 8)
    s.to_csv(tmp_path / "s.csv")
    back = SupportSamples.from_csv(tmp_path / "s.csv")
    assert np.array_equal(back.values, s.values) and np.array_equal(back.angles, s.angles)
    write_polygon_json(tmp_path / "p.json", [[0, 0], [1, 0], [0, 1]])
    assert "vertices" in (tmp_path / "p.json").read_text()
    with pytest.raises(ValueError):
        SupportSamples([0.0, 2 * np.pi], [1.0, 1.0])


def test_recover_support_rejects_unknown_method():
    with pytest.raises(ValueError):
        recover_support(AmplitudeSource.circle(1.0), 8, method="guess")


# ---- amplitude sources ------------------------------------------------------

@pytest.mark.parametrize("N", [8, 9])
def test_trig_interpolation_is_exact_for_band_limited_data(N):
    th = 2 * np.pi * np.arange(N) / N
    F = np.exp(1j * (2 * th[:, None] - 3 * th[None, :]))
    M = FarFieldMatrix(1.0, F)
    for a, b in ((0.3, 1.9), (4.0, 5.5)):
        assert abs(M.interpolate(unit(a), unit(b)) - np.exp(1j * (2 * a - 3 * b))) < 1e-12
    assert M.interpolate(unit(th[2]), unit(th[5])) == F[2, 5]


def test_matrix_source_reproduces_circle_amplitude():
    k, N = 2.0, 48
    d = uniform_directions(N)
    exact = AmplitudeSource.circle(k, 1.0, (0.5, 0.0))
    F = np.array([[exact(d[i], d[j]) for j in range(N)] for i in range(N)])
    src = AmplitudeSource(k, matrix=FarFieldMatrix(k, F))
    ao, ai = unit(0.123), unit(2.5)
    assert abs(src(ao, ai) - exact(ao, ai)) < 1e-8


def test_source_validation():
    with pytest.raises(ValueError):
        AmplitudeSource(1.0)
    with pytest.raises(ValueError):
        AmplitudeSource(1.0, fn=lambda a, b: 0, matrix=FarFieldMatrix(1.0, np.eye(4)))
    with pytest.raises(ValueError):
        AmplitudeSource(2.0, matrix=FarFieldMatrix(1.0, np.eye(4)))
    with pytest.raises(ValueError):
        FarFieldMatrix(1.0, np.eye(3))
