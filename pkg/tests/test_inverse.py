import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scatopt.forward import InclusionSet, RadialProfile, experiment1_pairs, layered_circle_field, phase_shifts, subsurface_data, well
from scatopt.inverse import (
    MultiFreqTarget,
    PotentialTarget,
    SubsurfaceProblem,
    admissible_diameter,
    invert_subsurface,
    layers_objective,
    potential_distance,
    potential_objective,
    synthetic_target,
    tilde_phi,
)
from scatopt.optim import HsdParams


@pytest.fixture(scope="module")
def two_inclusions():
    incl = InclusionSet([[0.4, -0.3, 0.5], [-1.2, 0.5, 0.3]], [1.0, 0.6])
    return incl, SubsurfaceProblem.experiment(subsurface_data(incl, experiment1_pairs()))


# ---- subsurface -------------------------------------------------------------

def test_tilde_phi_vanishes_at_truth(two_inclusions):
    incl, prob = two_inclusions
    val, v = tilde_phi(incl.z, prob)
    assert val < 1e-20 * np.sum(np.abs(prob.data.f) ** 2)
    assert np.allclose(v, incl.v, rtol=1e-6)


def test_tilde_phi_empty_configuration(two_inclusions):
    _, prob = two_inclusions
    val, v = tilde_phi(np.zeros((0, 3)), prob)
    assert val == pytest.approx(np.sum(np.abs(prob.data.f) ** 2))
    assert v.size == 0


def test_tilde_phi_clamps_intensities(two_inclusions):
    incl, prob = two_inclusions
    capped = SubsurfaceProblem(prob.data, prob.box, v_max=0.5)
    val, v = tilde_phi(incl.z, capped)
    assert np.all((v >= 0) & (v <= 0.5))
    assert val > 0


def test_tilde_phi_is_permutation_invariant(two_inclusions):
    incl, prob = two_inclusions
    z = incl.z + [[0.05, 0.0, 0.02], [0.0, -0.03, 0.01]]
    val, v = tilde_phi(z, prob)
    val_r, v_r = tilde_phi(z[::-1], prob)
    assert val_r == pytest.approx(val, rel=1e-10)
    assert np.allclose(v_r, v[::-1], rtol=1e-8)


def test_tilde_phi_wrong_position_is_worse(two_inclusions):
    incl, prob = two_inclusions
    assert tilde_phi(incl.z + [0.1, 0.0, 0.0], prob)[0] > tilde_phi(incl.z, prob)[0]


def test_invert_single_inclusion():
    incl = InclusionSet([[0.3, 0.2, 0.6]], [1.3])
    prob = SubsurfaceProblem.experiment(subsurface_data(incl, experiment1_pairs()))
    got, out = invert_subsurface(prob, HsdParams(M=4, T_max=300, n_max=2), seed=0)
    assert len(got) == 1
    assert np.allclose(got.z[0], incl.z[0], atol=1e-3)
    assert abs(got.v[0] - 1.3) < 1e-3
    assert out.best_value < 1e-5


# ---- potential --------------------------------------------------------------

def test_potential_objective_zero_at_truth():
    q = well("q2")
    target = PotentialTarget(1.0, phase_shifts(q, 1.0, 31))
    assert potential_objective(q, target) == 0.0


def test_potential_objective_of_zero_potential_is_one():
    target = PotentialTarget(1.0, phase_shifts(well("q1"), 1.0, 31))
    assert potential_objective(RadialProfile([], [], 10.0), target) == pytest.approx(1.0, abs=1e-14)


def test_potential_objective_matches_direct_sum():
    s = phase_shifts(well("q1"), 1.0, 31)
    t = PotentialTarget(1.0, s)
    p = RadialProfile([8.0], [-0.7], 10.0)
    expected = np.sum((phase_shifts(p, 1.0, 31).shifts[1:] - s.shifts[1:]) ** 2) / np.sum(s.shifts[1:] ** 2)
    assert potential_objective(p, t) == pytest.approx(expected, rel=1e-12)


def test_potential_target_validates():
    s = phase_shifts(well("q1"), 1.0, 10)
    with pytest.raises(ValueError):
        PotentialTarget(1.0, s, N=31)
    with pytest.raises(ValueError):
        PotentialTarget(1.0, phase_shifts(RadialProfile([], [], 10.0), 1.0, 31))


def test_potential_distance():
    unit = RadialProfile([1.0], [1.0], 10.0)
    zero = RadialProfile([], [], 10.0)
    assert potential_distance(unit, zero) == pytest.approx(math.sqrt(4 * math.pi / 3))
    assert potential_distance(unit, unit) == 0.0
    shell = RadialProfile([1.0, 2.0], [0.0, 2.0], 10.0)
    assert potential_distance(shell, zero) == pytest.approx(2 * math.sqrt(4 * math.pi / 3 * 7))
    a, b = well("q1"), well("q3")
    assert potential_distance(a, b) == pytest.approx(potential_distance(b, a))


profiles = st.lists(st.tuples(st.floats(0.1, 3.0), st.floats(-5.0, 5.0)), min_size=0, max_size=3).map(
    lambda ls: RadialProfile(np.cumsum([w for w, _ in ls]), [c for _, c in ls], 10.0))


@settings(max_examples=40, deadline=None)
@given(profiles, profiles, profiles)
def test_potential_distance_triangle_inequality(a, b, c):
    assert potential_distance(a, c) <= potential_distance(a, b) + potential_distance(b, c) + 1e-9


def test_admissible_diameter():
    assert admissible_diameter(1.0, 0.0, 1.0) == pytest.approx(math.sqrt(4 * math.pi / 3))
    assert potential_distance(RadialProfile([10.0], [-10.0], 10.0), RadialProfile([10.0], [10.0], 10.0)) == \
        pytest.approx(admissible_diameter(10.0, -10.0, 10.0))


# ---- layers -----------------------------------------------------------------

def test_layers_objective_zero_at_truth_and_positive_elsewhere():
    truth = RadialProfile([0.4, 0.8], [2.0, 1.5], 1.0, 1.0)
    target = synthetic_target(truth, [3.0, 6.5, 10.0], 1.0)
    assert target.P == 3 and target.angles.size == 36
    assert layers_objective(truth, target) == 0.0
    assert layers_objective(RadialProfile([0.4, 0.8], [2.0, 1.6], 1.0, 1.0), target) > 1e-4


def test_layers_objective_of_empty_profile():
    truth = RadialProfile([0.5], [3.0], 1.0, 1.0)
    target = synthetic_target(truth, [3.0], 1.0)
    g = target.samples[0]
    u0 = np.exp(1j * 3.0 * np.cos(g.angles))
    expected = np.sum(np.abs(u0 - g.values) ** 2) / np.sum(np.abs(g.values) ** 2)
    assert layers_objective(RadialProfile([], [], 1.0, 1.0), target) == pytest.approx(expected, rel=1e-10)


def test_multifreq_target_validates():
    a = layered_circle_field(RadialProfile([0.5], [2.0], 1.0, 1.0), 1.0, 1.0, [0.0, 1.0])
    b = layered_circle_field(RadialProfile([0.5], [2.0], 1.0, 1.0), 2.0, 1.0, [0.0, 2.0])
    with pytest.raises(ValueError):
        MultiFreqTarget([a, b])
    with pytest.raises(ValueError):
        MultiFreqTarget([])
