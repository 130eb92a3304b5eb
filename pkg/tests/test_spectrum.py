import math

import numpy as np
import pytest

from prufer_lab.errors import OutOfScopeError
from prufer_lab.spectrum import count_below, fd_count_below, jump_field, solve_window
from prufer_lab.torus import PotentialSpec, default_potential, sample_path, zero_path

FREE = PotentialSpec(0.3)


def test_free_count():
    p = zero_path(10.0, 1e-3)
    assert count_below(p, FREE, 10.0, 1.0) == 3


def test_free_count_on_a_level():
    L = 10.0
    p = zero_path(L, 1e-3)
    assert count_below(p, FREE, L, (5 * math.pi / L) ** 2) == 5


def test_nonpositive_energy_rejected():
    with pytest.raises(OutOfScopeError):
        count_below(zero_path(1.0, 0.1), FREE, 1.0, 0.0)


def test_picket_fence():
    L = 100.0
    res = solve_window(zero_path(L, 1e-3), FREE, L, 1.0, (0.0, 8 * math.pi))
    j = np.arange(32, 41)
    expected = j * math.pi - L
    expected = expected[(expected >= 0) & (expected <= 8 * math.pi)]
    assert res.atoms == pytest.approx(expected, abs=1e-7)
    assert np.allclose(res.nearest_neighbor_gaps(), math.pi, atol=1e-7)


def test_zero_width_window():
    res = solve_window(zero_path(50.0, 1e-3), FREE, 50.0, 1.0, (1.0, 1.0))
    assert res.count == 0


@pytest.mark.parametrize("seed", range(3))
def test_atoms_agree_with_oscillation_count(seed):
    spec = default_potential(0.3)
    L = 100.0
    path = sample_path(spec, L, 1e-3, (3, seed))
    lo, hi = 0.5, 6 * math.pi
    res = solve_window(path, spec, L, 1.0, (lo, hi))
    top = count_below(path, spec, L, (1 + hi / L) ** 2)
    bottom = count_below(path, spec, L, (1 + lo / L) ** 2)
    assert res.count == res.expected_count == top - bottom
    assert np.all(np.diff(res.atoms) > 0)


def test_fd_oracle_free_case():
    L = 10.0
    assert fd_count_below(zero_path(L, 1e-3), FREE, L, 1.0, points=20_000) == 3


def test_free_jump_field_on_hyperbolas():
    n = 200.0
    lams = [0.0, 2.5 * math.pi, 4.0 * math.pi]
    f = jump_field(zero_path(n, 1e-3), FREE, 1.0, n, lams)
    assert len(f.jumps[0]) == 0
    assert f.jumps[1] == pytest.approx([0.4, 0.8], abs=1e-5)
    assert f.jumps[2] == pytest.approx([0.25, 0.5, 0.75, 1.0], abs=1e-5)
    assert f.rectangle_count(0.0, 1.0, 0, 0) == 0
    counts = f.rectangle_counts([0.0, 0.5, 1.0])
    assert counts.tolist() == [[1, 1], [1, 1]]


def test_jump_field_rectangle_empty_lambda_range(cos_spec):
    n = 100.0
    f = jump_field(sample_path(cos_spec, n, 1e-3, (0, 4)), cos_spec, 1.0, n, [math.pi, math.pi])
    assert f.rectangle_count(0.0, 1.0, 0, 1) == 0
