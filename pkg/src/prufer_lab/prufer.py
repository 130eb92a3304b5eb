"""Prüfer phase of H x = kappa^2 x along a fixed noise path.

Writing ``(x, x'/kappa) = r (sin theta, cos theta)`` turns the Schroedinger
equation into the phase equation

    theta' = kappa - (V(t) / kappa) sin^2 theta,     V = a(t) F(X_t),

integrated here with Heun's method on piecewise-constant noise (F frozen on
each path step, a(t) evaluated continuously).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from prufer_lab.errors import DimensionError, ParameterError
from prufer_lab.torus import CONSTANT_COUPLING, NoisePath, PotentialSpec

# Tolerance (in units of pi) used when flooring phases, so that a phase
# sitting on k*pi up to rounding counts level k.
LEVEL_TOL = 1e-9

DEFAULT_T_MIN_FRACTION = 0.05


def default_dt(L: float, kappa: float = 1.0) -> float:
    return 1e-5 * L / max(kappa, 1e-12)


def _profile_args(spec: PotentialSpec):
    if spec.profile == CONSTANT_COUPLING:
        return 1, spec.alpha, spec.scale
    return 0, spec.alpha, 1.0


@numba.njit(cache=True, inline="always")
def _decay(profile, alpha, scale, t):
    if profile == 1:
        return scale
    return (1.0 + t * t) ** (-0.5 * alpha)


@numba.njit(cache=True)
def _terminal_phases(f, dt, steps, profile, alpha, scale, kappas, theta0, substeps):
    nk = kappas.shape[0]
    th = np.full(nk, theta0)
    h = dt / substeps
    for i in range(steps):
        fi = f[i]
        for q in range(substeps):
            t0 = i * dt + q * h
            g0 = _decay(profile, alpha, scale, t0) * fi
            g1 = _decay(profile, alpha, scale, t0 + h) * fi
            for j in range(nk):
                k = kappas[j]
                t = th[j]
                s = math.sin(t)
                k1 = k - g0 / k * s * s
                s = math.sin(t + h * k1)
                k2 = k - g1 / k * s * s
                th[j] = t + 0.5 * h * (k1 + k2)
    return th


@numba.njit(cache=True)
def _phase_trajectories(f, dt, steps, profile, alpha, scale, kappas, theta0, substeps):
    nk = kappas.shape[0]
    out = np.empty((nk, steps + 1))
    th = np.empty(nk)
    for j in range(nk):
        th[j] = theta0
        out[j, 0] = theta0
    h = dt / substeps
    for i in range(steps):
        fi = f[i]
        for q in range(substeps):
            t0 = i * dt + q * h
            g0 = _decay(profile, alpha, scale, t0) * fi
            g1 = _decay(profile, alpha, scale, t0 + h) * fi
            for j in range(nk):
                k = kappas[j]
                t = th[j]
                s = math.sin(t)
                k1 = k - g0 / k * s * s
                s = math.sin(t + h * k1)
                k2 = k - g1 / k * s * s
                th[j] = t + 0.5 * h * (k1 + k2)
        for j in range(nk):
            out[j, i + 1] = th[j]
    return out


def _check_path(path: NoisePath):
    if path.f_values.shape[0] != path.steps + 1:
        raise DimensionError(
            f"path has {path.f_values.shape[0]} samples but {path.steps} steps"
        )


def _check_kappas(kappas):
    kappas = np.atleast_1d(np.asarray(kappas, dtype=float))
    if np.any(~(kappas > 0)):
        raise ParameterError("wavenumbers must be positive")
    return kappas


def terminal_phases(path: NoisePath, spec: PotentialSpec, kappas, theta0=0.0, substeps=1):
    """theta at the end of the path for each wavenumber (one pass over the noise)."""
    _check_path(path)
    kappas = _check_kappas(kappas)
    profile, alpha, scale = _profile_args(spec)
    return _terminal_phases(
        path.f_values, path.dt, path.steps, profile, alpha, scale, kappas, float(theta0), int(substeps)
    )


def phase_trajectories(path: NoisePath, spec: PotentialSpec, kappas, theta0=0.0, substeps=1):
    """theta on the full path grid, shape (len(kappas), steps + 1)."""
    _check_path(path)
    kappas = _check_kappas(kappas)
    profile, alpha, scale = _profile_args(spec)
    return _phase_trajectories(
        path.f_values, path.dt, path.steps, profile, alpha, scale, kappas, float(theta0), int(substeps)
    )


@dataclass(frozen=True)
class PruferTrajectory:
    kappa: float
    grid_dt: float
    thetas: np.ndarray
    theta0: float = 0.0

    @property
    def times(self):
        return np.arange(self.thetas.shape[0]) * self.grid_dt

    @property
    def reduced(self):
        """theta - kappa t, the part driven by the potential."""
        return self.thetas - self.kappa * self.times

    def to_csv(self, path):
        np.savetxt(path, np.column_stack([self.times, self.thetas]), delimiter=",",
                   header="t,theta", comments="")


def integrate_phase(path: NoisePath, spec: PotentialSpec, kappa: float, theta0: float = 0.0,
                    substeps: int = 1) -> PruferTrajectory:
    if not (kappa > 0):
        raise ParameterError(f"kappa must be positive, got {kappa}")
    thetas = phase_trajectories(path, spec, [kappa], theta0, substeps)[0]
    return PruferTrajectory(float(kappa), path.dt, thetas, float(theta0))


def fractional(theta):
    """{x}_pi = x - floor(x / pi) pi, in [0, pi)."""
    x = np.asarray(theta, dtype=float)
    out = x - np.floor(x / np.pi) * np.pi
    # x slightly below a multiple of pi can round to exactly pi
    out = np.where(out >= np.pi, 0.0, out)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RelativePhase:
    """Theta_{t}(lambda) = theta_t(sqrt(E0) + lambda/L) - theta_t(sqrt(E0)) on the path grid."""

    lam: float
    big_theta: np.ndarray
    phi: float
    L: float
    dt: float

    @property
    def times(self):
        return np.arange(self.big_theta.shape[0]) * self.dt

    @property
    def terminal(self) -> float:
        return float(self.big_theta[-1])


def relative_phase(path: NoisePath, spec: PotentialSpec, e0: float, lam: float,
                   L: float | None = None, substeps: int = 1) -> RelativePhase:
    if not (e0 > 0):
        raise ParameterError(f"reference energy must be positive, got {e0}")
    L = path.horizon if L is None else float(L)
    if abs(L - path.horizon) > path.dt:
        raise DimensionError(f"path horizon {path.horizon} does not cover L={L}")
    kappa0 = math.sqrt(e0)
    kappa = kappa0 + lam / L
    if not (kappa > 0):
        raise ParameterError("sqrt(e0) + lambda/L must be positive")
    th = phase_trajectories(path, spec, [kappa0, kappa], 0.0, substeps)
    big = th[1] - th[0]
    return RelativePhase(float(lam), big, fractional(th[0, -1]), L, path.dt)


def first_passage_times(times, values, max_level=None):
    """Times of first passage of values through k*pi, k = 1, 2, ...

    Returns an array of shape (m, 2): (time, level). Crossing times are
    linearly interpolated between grid points.
    """
    values = np.asarray(values, dtype=float)
    times = np.asarray(times, dtype=float)
    levels = np.floor(values / np.pi + LEVEL_TOL)
    running = np.maximum.accumulate(np.maximum(levels, 0.0))
    top = int(running[-1]) if max_level is None else min(int(running[-1]), max_level)
    out = np.empty((top, 2))
    for k in range(1, top + 1):
        i = int(np.argmax(running >= k))
        if i == 0:
            out[k - 1] = (times[0], k)
            continue
        y0, y1 = values[i - 1], values[i]
        frac = (k * np.pi - y0) / (y1 - y0) if y1 != y0 else 1.0
        frac = min(max(frac, 0.0), 1.0)
        out[k - 1] = (times[i - 1] + frac * (times[i] - times[i - 1]), k)
    return out


def jump_times(rel: RelativePhase, t_min: float | None = None):
    """(time, level) pairs where floor(Theta / pi) first reaches each level k >= 1.

    Times are in operator units. ``t_min`` only affects
    :func:`monotonicity_violations`; first passages before it are kept.
    """
    return first_passage_times(rel.times, rel.big_theta)


def monotonicity_violations(rel: RelativePhase, t_min: float | None = None) -> tuple[int, int]:
    """Number of downward steps of floor(Theta/pi) before and after ``t_min``."""
    if t_min is None:
        t_min = DEFAULT_T_MIN_FRACTION * rel.L
    levels = np.floor(rel.big_theta / np.pi + LEVEL_TOL)
    down = np.diff(levels) < 0
    late = rel.times[1:] >= t_min
    return int(np.sum(down & ~late)), int(np.sum(down & late))
