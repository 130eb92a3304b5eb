"""Eigenvalues of the Dirichlet restriction H_L via Sturm oscillation.

E is an eigenvalue of H_L exactly when theta_L(sqrt(E)) is a multiple of pi,
and floor(theta_L(kappa)/pi) counts the eigenvalues below kappa^2. Atoms of
the rescaled process sit at L (kappa_j - sqrt(E0)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from prufer_lab.errors import BracketError, OutOfScopeError, ParameterError
from prufer_lab.prufer import (
    LEVEL_TOL,
    first_passage_times,
    fractional,
    phase_trajectories,
    terminal_phases,
)
from prufer_lab.torus import NoisePath, PotentialSpec, eval_a

POINTS_PER_LEVEL = 32
# Phase decrease (radians) tolerated between neighbouring scan points before
# the scan is declared non-monotone.
MONOTONE_SLACK = 1e-6
MAX_RESCANS = 3


def _levels(theta):
    return np.floor(np.asarray(theta) / np.pi + LEVEL_TOL).astype(np.int64)


def count_below(path: NoisePath, spec: PotentialSpec, L: float, energy: float) -> int:
    """floor(theta_L(sqrt(energy)) / pi): eigenvalues of H_L in (-inf, energy]."""
    if not (energy > 0):
        raise OutOfScopeError("only positive energies (the bulk E > 0) are supported")
    _check_horizon(path, L)
    theta = terminal_phases(path, spec, [math.sqrt(energy)])[0]
    return int(_levels(theta))


def _check_horizon(path, L):
    if abs(path.horizon - L) > path.dt:
        raise ParameterError(f"path horizon {path.horizon} does not match L={L}")


@dataclass(frozen=True)
class SpectrumResult:
    L: float
    e0: float
    window: tuple[float, float]
    eigen_kappas: np.ndarray
    atoms: np.ndarray
    expected_count: int
    phi: float
    rescans: int = 0

    @property
    def count(self) -> int:
        return int(self.atoms.shape[0])

    def nearest_neighbor_gaps(self):
        return np.diff(self.atoms)


def _bisect_levels(path, spec, lo, hi, targets, tol):
    """Vectorized bisection of theta_L(kappa) = target on brackets [lo, hi]."""
    lo = lo.copy()
    hi = hi.copy()
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        th = terminal_phases(path, spec, mid)
        below = th < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def solve_window(path: NoisePath, spec: PotentialSpec, L: float, e0: float, window,
                 points_per_level: int = POINTS_PER_LEVEL, tol: float | None = None) -> SpectrumResult:
    """Rescaled eigenvalues L (sqrt(E_j) - sqrt(E0)) inside ``window``.

    Coarse scan in kappa, then bisection on each bracketed crossing of k*pi.
    """
    lam_min, lam_max = map(float, window)
    if not (math.isfinite(lam_min) and math.isfinite(lam_max)) or lam_max < lam_min:
        raise ParameterError(f"bad window {window!r}")
    if not (e0 > 0):
        raise ParameterError("reference energy must be positive")
    _check_horizon(path, L)
    kappa0 = math.sqrt(e0)
    k_min, k_max = kappa0 + lam_min / L, kappa0 + lam_max / L
    if not (k_min > 0):
        raise ParameterError("sqrt(e0) + lambda_min / L must be positive")
    theta0 = terminal_phases(path, spec, [kappa0])[0]
    phi = fractional(theta0)
    width = lam_max - lam_min
    if width == 0:
        return SpectrumResult(L, e0, (lam_min, lam_max), np.empty(0), np.empty(0), 0, phi)
    if tol is None:
        tol = 1e-10 * width / L

    n_coarse = max(2, int(math.ceil(points_per_level * width / math.pi)) + 1)
    kappas = np.linspace(k_min, k_max, n_coarse)
    thetas = terminal_phases(path, spec, kappas)
    rescans = 0
    while True:
        bad = np.nonzero(np.diff(thetas) < -MONOTONE_SLACK)[0]
        if bad.size == 0:
            break
        if rescans >= MAX_RESCANS:
            i = int(bad[0])
            raise BracketError(
                f"theta_L decreases between kappa={kappas[i]!r} and {kappas[i + 1]!r}",
                (float(kappas[i]), float(kappas[i + 1])),
            )
        # refine the offending cells eightfold
        new = [np.linspace(kappas[i], kappas[i + 1], 9)[1:-1] for i in bad]
        extra = np.concatenate(new)
        kappas = np.concatenate([kappas, extra])
        thetas = np.concatenate([thetas, terminal_phases(path, spec, extra)])
        order = np.argsort(kappas)
        kappas, thetas = kappas[order], thetas[order]
        rescans += 1

    levels = _levels(thetas)
    levels = np.maximum.accumulate(levels)
    expected = int(levels[-1] - levels[0])
    lo, hi, targets = [], [], []
    for i in np.nonzero(np.diff(levels) > 0)[0]:
        for k in range(levels[i] + 1, levels[i + 1] + 1):
            lo.append(kappas[i])
            hi.append(kappas[i + 1])
            targets.append(k * math.pi)
    if targets:
        roots = _bisect_levels(path, spec, np.array(lo), np.array(hi), np.array(targets), tol)
    else:
        roots = np.empty(0)
    atoms = L * (roots - kappa0)
    keep = (atoms >= lam_min) & (atoms <= lam_max)
    return SpectrumResult(L, e0, (lam_min, lam_max), roots[keep], atoms[keep], expected, phi, rescans)


@dataclass(frozen=True)
class JumpField:
    """First-passage times of floor(Theta_{n t}(lambda) / pi) on a lambda grid.

    ``jumps[i]`` holds the jump times (t in [0, 1]) for ``lambda_grid[i]``.
    """

    lambda_grid: np.ndarray
    jumps: list = field(default_factory=list)

    def cumulative(self, t, i) -> int:
        """Number of jumps of lambda_grid[i] in [0, t]."""
        return int(np.searchsorted(self.jumps[i], t, side="right"))

    def rectangle_count(self, t1, t2, i1, i2) -> int:
        """N(t1, t2; lambda_i1, lambda_i2) from the cumulative jump counts."""
        c = self.cumulative
        return (c(t2, i2) - c(t1, i2)) - (c(t2, i1) - c(t1, i1))

    def rectangle_counts(self, t_grid) -> np.ndarray:
        """Counts on the partition t_grid x lambda_grid, shape (len(t_grid)-1, len(lambda)-1)."""
        t_grid = np.asarray(t_grid, dtype=float)
        cum = np.array([[np.searchsorted(j, t, side="right") for j in self.jumps] for t in t_grid])
        return np.diff(np.diff(cum, axis=0), axis=1)

    def events(self):
        """(t, lambda-cell) pairs: jumps of lambda_grid[i] not matched at lambda_grid[i-1]."""
        out = []
        for i in range(1, len(self.lambda_grid)):
            out.extend((float(t), i - 1) for t in self.jumps[i][len(self.jumps[i - 1]):])
        return out


def jump_field(path: NoisePath, spec: PotentialSpec, e0: float, n: float, lambda_grid,
               t_grid=None) -> JumpField:
    lambda_grid = np.asarray(lambda_grid, dtype=float)
    if np.any(np.diff(lambda_grid) < 0):
        raise ParameterError("lambda_grid must be increasing")
    _check_horizon(path, n)
    kappa0 = math.sqrt(e0)
    kappas = np.concatenate([[kappa0], kappa0 + lambda_grid / n])
    th = phase_trajectories(path, spec, kappas)
    t = path.times / n
    jumps = []
    for row in th[1:]:
        fp = first_passage_times(t, row - th[0])
        jumps.append(fp[:, 0].copy())
    return JumpField(lambda_grid, jumps)


@numba.njit(cache=True)
def _sturm_count(diag, off2, energy):
    count = 0
    d = diag[0] - energy
    if d < 0:
        count += 1
    for i in range(1, diag.shape[0]):
        if d == 0.0:
            d = 1e-300
        d = (diag[i] - energy) - off2 / d
        if d < 0:
            count += 1
    return count


def fd_count_below(path: NoisePath, spec: PotentialSpec, L: float, energy: float,
                   points: int = 200_000) -> int:
    """Eigenvalues below ``energy`` of the 3-point finite-difference H_L.

    Independent oracle for :func:`count_below`: Dirichlet Laplacian on a grid of
    step L/points, potential sampled from the same path, eigenvalues counted
    with a Sturm sequence (negative pivots of LDL^T of H - E).
    """
    _check_horizon(path, L)
    h = L / points
    x = np.arange(1, points) * h
    idx = np.minimum((x / path.dt).astype(np.int64), path.steps)
    v = eval_a(spec, x) * path.f_values[idx]
    diag = 2.0 / h**2 + v
    return int(_sturm_count(diag, 1.0 / h**4, float(energy)))
