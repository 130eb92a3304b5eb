import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prufer_lab.errors import DegeneratePotentialError, ParameterError, SingularResolventError
from prufer_lab.torus import (
    CONSTANT_COUPLING,
    PotentialSpec,
    compute_constants,
    coupling_potential,
    eval_a,
    resolvent_coeffs,
    sample_path,
    zero_path,
)


def test_single_step_path_has_two_positions(cos_spec):
    p = sample_path(cos_spec, 1.0, 1.0, (3, 1))
    assert p.positions.shape == (2, 1)
    assert p.steps == 1


def test_zero_potential_gives_zero_f():
    spec = PotentialSpec(0.3)
    p = sample_path(spec, 5.0, 0.01, (0, 0))
    assert np.all(p.f_values == 0)


def test_same_key_same_path(cos_spec):
    a = sample_path(cos_spec, 10.0, 0.01, (42, 7))
    b = sample_path(cos_spec, 10.0, 0.01, (42, 7))
    assert np.array_equal(a.positions, b.positions)
    assert np.array_equal(a.f_values, b.f_values)
    c = sample_path(cos_spec, 10.0, 0.01, (42, 8))
    assert not np.array_equal(a.positions, c.positions)


def test_f_values_match_positions(cos_spec):
    p = sample_path(cos_spec, 20.0, 0.01, (1, 2))
    assert np.allclose(cos_spec.evaluate_f(p.positions), p.f_values, atol=1e-12, rtol=0)
    assert np.allclose(p.f_values, 2 * np.cos(p.positions[:, 0]), atol=1e-12)


def test_increment_variance_matches_half_laplacian(cos_spec):
    # generator (1/2) Laplacian: Var of an unwrapped increment over dt is dt
    spec = PotentialSpec(0.3, 2, {(1, 0): 1.0, (-1, 0): 1.0})
    p = sample_path(spec, 2000.0, 0.01, (5, 0))
    d = np.diff(p.positions, axis=0)
    d = (d + math.pi) % (2 * math.pi) - math.pi
    assert d.var() == pytest.approx(0.01, rel=0.02)


def test_eval_a():
    assert eval_a(PotentialSpec(0.3), 0.0) == 1.0
    big = 1e8
    assert eval_a(PotentialSpec(0.5), big) * big**0.5 == pytest.approx(1.0, rel=1e-12)
    const = PotentialSpec(0.3, profile=CONSTANT_COUPLING, scale=0.1)
    assert eval_a(const, 57.3) == 0.1


def test_coupling_potential_scale(cos_spec):
    c = coupling_potential(cos_spec, 400.0)
    assert c.profile == CONSTANT_COUPLING
    assert c.scale == pytest.approx(400.0**-0.3)


def test_resolvent_of_cosine(cos_spec):
    g = resolvent_coeffs(cos_spec, 1.0)
    expected = 1 / complex(-0.5, 2.0)
    assert g[(1,)] == pytest.approx(complex(-0.117647058823529, -0.470588235294118), abs=1e-12)
    assert g[(1,)] == pytest.approx(expected)
    assert g[(-1,)] == pytest.approx(g[(1,)])
    assert resolvent_coeffs(PotentialSpec(0.3), 1.0) == {}


def test_resolvent_singular_at_zero(cos_spec):
    with pytest.raises(SingularResolventError):
        resolvent_coeffs(cos_spec, 0.0)


def test_constants_of_cosine(cos_spec):
    c = compute_constants(cos_spec, 1.0)
    assert c.c_e0 == pytest.approx(2 / 4.25, rel=1e-14)
    assert c.beta_e0 == pytest.approx(17.0, rel=1e-14)


def test_constants_quadratic_in_f(cos_spec):
    c1 = compute_constants(cos_spec, 1.0)
    c2 = compute_constants(cos_spec.scaled(2.0), 1.0)
    assert c2.c_e0 == pytest.approx(4 * c1.c_e0, rel=1e-14)
    assert c2.beta_e0 == pytest.approx(c1.beta_e0 / 4, rel=1e-14)


def _random_spec(rng, dim):
    coeffs = {}
    for _ in range(rng.integers(1, 5)):
        k = tuple(int(v) for v in rng.integers(-3, 4, size=dim))
        if not any(k):
            continue
        c = complex(rng.normal(), rng.normal())
        coeffs[k] = c
        coeffs[tuple(-v for v in k)] = c.conjugate()
    if not coeffs:
        coeffs = {(1,) * dim: 1.0, (-1,) * dim: 1.0}
    return PotentialSpec(0.3, dim, coeffs)


@pytest.mark.parametrize("trial", range(10))
def test_psi_mean_equals_gradient_route(trial):
    rng = np.random.default_rng(trial)
    spec = _random_spec(rng, int(rng.integers(1, 4)))
    c = compute_constants(spec, float(rng.uniform(0.2, 4.0)))
    assert c.psi_mean == pytest.approx(c.c_e0, rel=1e-12)


def test_degenerate_potential():
    with pytest.raises(DegeneratePotentialError):
        compute_constants(PotentialSpec(0.3), 1.0)


def test_spec_validation():
    with pytest.raises(ParameterError):
        PotentialSpec(0.3, 1, {(0,): 1.0})
    with pytest.raises(ParameterError):
        PotentialSpec(0.3, 1, {(1,): 1.0, (-1,): 2.0})
    with pytest.raises(ParameterError):
        PotentialSpec(0.3, 2, {(1,): 1.0})


def test_table_round_trip(cos_spec):
    again = PotentialSpec.from_table(cos_spec.to_table())
    assert again == cos_spec


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 1e6), st.floats(0.05, 0.49))
def test_power_decay_bounded_by_one(t, alpha):
    a = eval_a(PotentialSpec(alpha), t)
    assert 0 < a <= 1.0


def test_zero_path_horizon():
    p = zero_path(10.0, 0.3)
    assert p.horizon == pytest.approx(10.0)
    assert np.all(p.f_values == 0)
