import math

import numpy as np
import pytest

from prufer_lab.errors import AsymptoticRegimeError, ParameterError
from prufer_lab.explosion import (
    DriftPotential,
    ExplosionRecord,
    asymptotic_critical_points,
    critical_points,
    laplace_limit,
    limit_mean,
    mean_explosion_quadrature,
    sweep,
    write_sweep_csv,
)

# Independent value: stiff Radau integration of u' = -(2 b / C^2) u + 1, I' = u
# on [-14, 24] with an analytic Jacobian (C = 20, lambda = pi, delta = eps = 0.01, r = -5).
# A log-domain trapezoid with an asymptotic right tail agrees to 1e-10.
REFERENCE_R_MINUS_5 = 0.9336281360419117

POT = DriftPotential(20.0, math.pi, 0.01, 0.01)


def test_critical_points_near_asymptotics():
    a, b = critical_points(POT)
    a0, b0 = asymptotic_critical_points(POT)
    assert abs(a - (POT.delta + math.log(POT.lambda_tilde / POT.c_n**2))) <= 2 / POT.c_n**2
    assert abs(b - b0) <= 2 / POT.c_n**2
    assert a < b < 0


def test_critical_points_are_roots():
    for r in critical_points(POT):
        assert abs(POT.W_plus(r)) <= 1e-10


def test_barrier_top_approaches_zero():
    tops = [critical_points(DriftPotential(c, math.pi))[1] for c in (10.0, 30.0, 100.0)]
    assert all(t < 0 for t in tops)
    assert abs(tops[0]) > abs(tops[1]) > abs(tops[2])
    for c, b in zip((10.0, 30.0, 100.0), tops):
        # lambda cosh b = (C^2/2) |tanh b|
        assert math.pi * math.cosh(b) == pytest.approx(0.5 * c * c * abs(math.tanh(b)), rel=1e-9)


def test_no_roots_when_lambda_dominates():
    with pytest.raises(AsymptoticRegimeError):
        critical_points(DriftPotential(1.0, 10.0))


def test_potential_derivative():
    rng = np.random.default_rng(0)
    x = rng.uniform(-10, 10, 1000)
    x = x[(np.abs(x) > 1e-3) & (np.abs(x + POT.delta) > 1e-3)]
    h = 1e-6
    fd = (POT.V_plus(x + h) - POT.V_plus(x - h)) / (2 * h)
    w = POT.W_plus(x)
    assert np.max(np.abs(fd - w) / np.abs(w)) < 1e-4


def test_potential_continuous_at_kinks():
    for k in (0.0, -POT.delta):
        assert POT.V_plus(k + 1e-12) == pytest.approx(POT.V_plus(k - 1e-12), abs=1e-9)


def test_quadrature_matches_reference():
    assert mean_explosion_quadrature(POT, -5.0) == pytest.approx(REFERENCE_R_MINUS_5, rel=1e-6)


def test_quadrature_decreasing_in_start():
    vals = [mean_explosion_quadrature(POT, r) for r in (-12.0, -6.0, -2.0, 0.0, 1.0, 3.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("c", [20.0, 50.0, 400.0])
@pytest.mark.parametrize("r", [-8.0, 0.0, 2.0])
def test_exact_without_envelopes(c, r):
    # Theta - lambda t is a martingale for the Riccati flow, so the mean is C-free
    pot = DriftPotential(c, math.pi)
    assert mean_explosion_quadrature(pot, r) == pytest.approx(limit_mean(math.pi, r), rel=1e-7)


def test_limit_mean():
    assert limit_mean(1.0, -1e4) == pytest.approx(math.pi)
    assert limit_mean(2.0, 0.0) == pytest.approx(math.pi / 4)
    assert limit_mean(1.0, 2.0) == pytest.approx(math.pi - 2 * math.atan(math.exp(2.0)), rel=1e-14)
    assert limit_mean(1.0, 2.0) == pytest.approx(0.2690359907488813, rel=1e-14)


def test_laplace_limit():
    assert laplace_limit(0.0) == 1.0
    assert laplace_limit(1.0) == 0.5
    assert laplace_limit(3.0) == 0.25
    with pytest.raises(ParameterError):
        laplace_limit(-1.0)


def test_record_statistics():
    rec = ExplosionRecord({}, np.array([1.0, 2.0, 3.0]))
    assert rec.mean == 2.0
    assert rec.standard_error == pytest.approx(1 / math.sqrt(3))
    with pytest.raises(ParameterError):
        ExplosionRecord({}, np.array([1.0, 0.0]))


def test_sweep_csv(tmp_path):
    rows = sweep([20.0], [math.pi], [0.0])
    write_sweep_csv(tmp_path / "s.csv", rows)
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "C_n,lambda,r,mean_time,limit_value"
    assert float(lines[1].split(",")[3]) == pytest.approx(0.5, rel=1e-7)
