import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prufer_lab.errors import ParameterError
from prufer_lab.prufer import (
    first_passage_times,
    fractional,
    integrate_phase,
    jump_times,
    monotonicity_violations,
    relative_phase,
    terminal_phases,
)
from prufer_lab.spectrum import count_below, fd_count_below
from prufer_lab.torus import CONSTANT_COUPLING, NoisePath, PotentialSpec, default_potential, sample_path, zero_path

FREE = PotentialSpec(0.3)


def test_free_phase_is_linear():
    p = zero_path(20.0, 0.01)
    tr = integrate_phase(p, FREE, 1.7)
    assert np.allclose(tr.thetas, 1.7 * tr.times, atol=1e-10, rtol=0)
    assert np.allclose(tr.reduced, 0.0, atol=1e-10)


def test_stationary_slope_at_resonant_potential():
    # a F == kappa^2 and theta = pi/2: theta' = kappa cos^2 theta = 0
    kappa = 1.3
    spec = PotentialSpec(0.3, profile=CONSTANT_COUPLING, scale=kappa**2)
    steps = 1000
    path = NoisePath(0.01, steps, np.zeros((steps + 1, 1)), np.ones(steps + 1), (0, 0))
    th = integrate_phase(path, spec, kappa, theta0=math.pi / 2).thetas
    assert np.allclose(th, math.pi / 2, atol=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_count_matches_finite_difference(seed):
    spec = default_potential(0.3)
    L = 50.0
    path = sample_path(spec, L, 1e-3, (11, seed))
    n = count_below(path, spec, L, 1.0)
    assert abs(n - fd_count_below(path, spec, L, 1.0)) <= 1


def test_relative_phase_free():
    p = zero_path(100.0, 0.01)
    rel = relative_phase(p, FREE, 1.0, 2.5)
    assert rel.terminal == pytest.approx(2.5, abs=1e-9)
    assert np.allclose(rel.big_theta, 2.5 * rel.times / 100.0, atol=1e-9)


def test_relative_phase_zero_lambda(cos_spec):
    p = sample_path(cos_spec, 30.0, 0.005, (0, 1))
    rel = relative_phase(p, cos_spec, 1.0, 0.0)
    assert np.all(rel.big_theta == 0)
    assert 0 <= rel.phi < math.pi


@pytest.mark.parametrize("x, expected", [(1.5 * math.pi, 0.5 * math.pi), (-0.1, math.pi - 0.1),
                                         (3 * math.pi, 0.0), (-2 * math.pi, 0.0), (0.0, 0.0)])
def test_fractional(x, expected):
    assert fractional(x) == pytest.approx(expected, abs=1e-12)


def test_no_jumps_for_flat_phase():
    p = zero_path(10.0, 0.01)
    rel = relative_phase(p, FREE, 1.0, 0.0)
    assert jump_times(rel).shape == (0, 2)


def test_free_jumps_at_linear_crossings():
    L = 100.0
    lam = 2.5 * math.pi
    rel = relative_phase(zero_path(L, 0.01), FREE, 1.0, lam)
    j = jump_times(rel)
    assert j[:, 1].tolist() == [1, 2]
    assert j[:, 0] == pytest.approx([L * math.pi / lam, 2 * L * math.pi / lam], abs=1e-6)
    assert monotonicity_violations(rel) == (0, 0)


def test_first_passage_interpolates():
    fp = first_passage_times([0.0, 1.0, 2.0], [0.0, 2 * math.pi, 2.5 * math.pi])
    assert fp[:, 0] == pytest.approx([0.5, 1.0])


def test_positive_wavenumbers_required(cos_spec):
    with pytest.raises(ParameterError):
        terminal_phases(zero_path(1.0, 0.1), cos_spec, [0.0])


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.3, 2.0), st.floats(1e-4, 0.5))
def test_phase_monotone_in_kappa(seed, k1, dk):
    spec = default_potential(0.3)
    path = sample_path(spec, 20.0, 1e-3, (seed, 0))
    th = terminal_phases(path, spec, [k1, k1 + dk])
    assert th[0] <= th[1] + 1e-9
