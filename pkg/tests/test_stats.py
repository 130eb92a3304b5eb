import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prufer_lab.errors import ParameterError
from prufer_lab.rng import STREAM_SAMPLING, generator
from prufer_lab.stats import (
    PointProcessSample,
    TestReport,
    dispersion_index,
    empirical_intensity,
    independence_test,
    ks_exponential,
    nesting_measure,
    order_violation_measure,
    poisson_dispersion,
    time_above_threshold,
    uniformity_test,
)


def test_ks_single_sample():
    rep = ks_exponential([0.5], 1.0)
    cdf = 1 - math.exp(-0.5)
    assert rep.statistic == pytest.approx(max(1 - cdf, cdf), abs=1e-12)
    assert rep.statistic == pytest.approx(0.606531, abs=1e-6)


def test_ks_self_consistent():
    u = generator(1, 0, STREAM_SAMPLING).random(10_000)
    rep = ks_exponential(-np.log1p(-u) / 2.0, 2.0)
    assert rep.p_value > 0.01 and rep.passed


def test_ks_degenerate_at_zero():
    rep = ks_exponential(np.full(100, 1e-12), 1.0)
    assert rep.statistic == pytest.approx(1.0, abs=1e-9)
    assert not rep.passed


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0.01, 50.0), min_size=2, max_size=40), st.floats(0.1, 10.0))
def test_ks_scale_invariance(xs, c):
    # rescaling samples and rate together leaves the statistic unchanged
    a = ks_exponential(xs, 1.0).statistic
    b = ks_exponential(np.asarray(xs) * c, 1.0 / c).statistic
    assert a == pytest.approx(b, abs=1e-9)


def test_dispersion_examples():
    assert dispersion_index([3, 3, 3, 3]) == 0.0
    assert dispersion_index([0, 1, 2, 3]) == pytest.approx((5 / 3) / 1.5)


def test_poisson_counts_pass():
    counts = generator(2, 0, STREAM_SAMPLING).poisson(4.0, 2000)
    rep = poisson_dispersion(counts, 4.0)
    assert 0.9 <= rep.statistic <= 1.1
    assert rep.passed


def test_poisson_dispersion_zero_mean():
    rep = poisson_dispersion([0, 0, 0])
    assert not rep.passed and rep.p_value is None


def test_uniformity_examples():
    m = 1000
    grid = np.arange(m) * math.pi / m
    assert uniformity_test(grid).statistic <= 2.0 / m
    point = uniformity_test(np.full(50, math.pi / 2))
    assert point.statistic == pytest.approx(0.5)
    assert not point.passed
    with pytest.raises(ParameterError):
        uniformity_test([math.pi])


def test_independence_extremes():
    x = np.arange(30) % 7
    assert independence_test(np.column_stack([x, x]), shuffles=500).statistic == pytest.approx(1.0)
    assert independence_test(np.column_stack([x, -x]), shuffles=500).statistic == pytest.approx(-1.0)


def test_independence_of_independent_counts():
    g = generator(3, 0, STREAM_SAMPLING)
    rep = independence_test(g.poisson(2.0, (400, 2)), shuffles=2000)
    assert rep.p_value > 0.01


def test_nesting_examples():
    a = [0.1, 0.5, 0.9]
    assert nesting_measure(a, a, 0.0) == 1.0
    assert nesting_measure([], a, 0.0) == 1.0
    assert nesting_measure(a, [], 0.1) == 0.0


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 1), max_size=20), st.lists(st.floats(0, 1), min_size=1, max_size=20),
       st.floats(0, 0.5), st.floats(0, 0.5))
def test_nesting_monotone_in_tau(a, b, t1, t2):
    lo, hi = sorted((t1, t2))
    assert nesting_measure(a, b, lo) <= nesting_measure(a, b, hi)


def test_time_above_threshold():
    t = np.linspace(0, 1, 101)
    assert time_above_threshold([(t, np.zeros_like(t))], 0.5) == 0.0
    ramp = (t, 0.9 * math.pi * t)
    assert time_above_threshold([ramp], 1e-9) == pytest.approx(1.0)


def test_order_violation():
    t = np.linspace(0, 1, 101)
    p = (t, 0.5 * t)
    assert order_violation_measure([p], [p]) == pytest.approx(1.0)
    # both phases below the first wrap: lambda t < lambda' t, no misordering
    assert order_violation_measure([(t, 1.0 * t)], [(t, 2.0 * t)]) == pytest.approx(0.0)


def test_intensity_picket_fence():
    samples = [np.arange(0, 20) * math.pi + 0.5 for _ in range(3)]
    est = empirical_intensity(samples, np.arange(0, 11) * 2 * math.pi, 1 / math.pi)
    assert np.allclose(est.rate, 1 / math.pi)
    assert np.all(est.within(2.0))


def test_intensity_empty():
    est = empirical_intensity([], [0.0, 1.0, 2.0])
    assert np.all(est.rate == 0)


def test_intensity_callable_target():
    est = empirical_intensity([[0.5]], [0.0, 1.0], lambda s: 3 * s**2)
    assert est.target[0] == pytest.approx(1.0)


def test_report_json_and_purity():
    a = ks_exponential([0.2, 0.7, 1.3], 1.0)
    b = ks_exponential([0.2, 0.7, 1.3], 1.0)
    assert a == b and a.dumps() == b.dumps()
    assert set(a.to_json()) >= {"test", "statistic", "p_value", "n", "target", "pass"}
    with pytest.raises(ParameterError):
        TestReport("x", 0.0, 1.5, 1, "", True)


def test_point_process_sample():
    s = PointProcessSample(np.array([0.5, 1.0, 2.0]), (0.0, 3.0))
    assert s.count == 3
    assert s.gaps().tolist() == [0.5, 1.0]
    with pytest.raises(ParameterError):
        PointProcessSample(np.array([2.0, 1.0]), (0.0, 3.0))
