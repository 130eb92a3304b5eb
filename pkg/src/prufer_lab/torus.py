"""Random potential on the flat torus.

The potential is ``a(t) F(X_t)`` with ``X`` a Brownian motion on
``[0, 2pi)^d`` and ``F`` a real trigonometric polynomial with zero mean.
The resolvent ``(L + 2i kappa)^{-1} F`` is diagonal in the Fourier basis,
which gives the diffusion constants of the limiting phase equations in
closed form.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from prufer_lab import rng as _rng
from prufer_lab.errors import (
    DegeneratePotentialError,
    ParameterError,
    SingularResolventError,
)

# Generator of the torus Brownian motion is GENERATOR_SCALE * Laplacian.
# 0.5 is standard Brownian motion; 1.0 gives the "Delta" convention.
GENERATOR_SCALE = 0.5

POWER_DECAY = "power"
CONSTANT_COUPLING = "constant"
PROFILES = (POWER_DECAY, CONSTANT_COUPLING)

_HERMITIAN_TOL = 1e-12


def _as_key(k) -> tuple[int, ...]:
    if isinstance(k, (int, np.integer)):
        return (int(k),)
    return tuple(int(v) for v in k)


@dataclass(frozen=True)
class PotentialSpec:
    """Decay exponent, decay profile and Fourier data of ``F``.

    ``fourier`` maps integer wave vectors to complex coefficients ``c_k`` of
    ``F(x) = sum_k c_k exp(i k.x)``. ``scale`` is the coupling constant used by
    the constant profile (``L**-alpha`` for the decaying-coupling model).
    """

    alpha: float
    dim: int = 1
    fourier: Mapping[tuple[int, ...], complex] = field(default_factory=dict)
    profile: str = POWER_DECAY
    scale: float = 1.0

    def __post_init__(self):
        if self.dim < 1:
            raise ParameterError(f"torus dimension must be >= 1, got {self.dim}")
        if self.profile not in PROFILES:
            raise ParameterError(f"unknown profile {self.profile!r}")
        coeffs = {}
        for k, c in dict(self.fourier).items():
            key = _as_key(k)
            if len(key) != self.dim:
                raise ParameterError(f"wave vector {key} does not match dim={self.dim}")
            c = complex(c)
            if c == 0:
                continue
            if not any(key):
                raise ParameterError("F must have zero mean: c_0 must vanish")
            coeffs[key] = c
        for key, c in coeffs.items():
            partner = coeffs.get(tuple(-v for v in key), 0j)
            if abs(partner - c.conjugate()) > _HERMITIAN_TOL * max(1.0, abs(c)):
                raise ParameterError(f"coefficients are not Hermitian at k={key}: F must be real")
        object.__setattr__(self, "fourier", coeffs)

    @property
    def is_zero(self) -> bool:
        return not self.fourier

    def wave_vectors(self) -> np.ndarray:
        if not self.fourier:
            return np.zeros((0, self.dim), dtype=np.int64)
        return np.array(list(self.fourier.keys()), dtype=np.int64)

    def coefficients(self) -> np.ndarray:
        return np.array(list(self.fourier.values()), dtype=np.complex128)

    def evaluate_f(self, positions) -> np.ndarray:
        """F at an array of torus points of shape (m, dim) (or (m,) when dim == 1)."""
        x = np.asarray(positions, dtype=float)
        if x.ndim == 1:
            x = x[:, None] if self.dim == 1 else x[None, :]
        if not self.fourier:
            return np.zeros(x.shape[0])
        phases = x @ self.wave_vectors().T.astype(float)
        return np.real(np.exp(1j * phases) @ self.coefficients())

    def scaled(self, factor: float) -> "PotentialSpec":
        return PotentialSpec(
            self.alpha,
            self.dim,
            {k: factor * c for k, c in self.fourier.items()},
            self.profile,
            self.scale,
        )

    def to_table(self) -> dict:
        rows = [[*k, c.real, c.imag] for k, c in sorted(self.fourier.items())]
        table = {"alpha": self.alpha, "dim": self.dim, "fourier": rows, "profile": self.profile}
        if self.profile == CONSTANT_COUPLING:
            table["scale"] = self.scale
        return table

    @classmethod
    def from_table(cls, table: Mapping) -> "PotentialSpec":
        dim = int(table.get("dim", 1))
        fourier = {}
        for row in table.get("fourier", []):
            if len(row) != dim + 2:
                raise ParameterError(f"fourier row {row!r} must have {dim} indices then re, im")
            fourier[_as_key(row[:dim])] = complex(row[dim], row[dim + 1])
        profile = table.get("profile", POWER_DECAY)
        scale = float(table.get("scale", 1.0))
        return cls(float(table["alpha"]), dim, fourier, profile, scale)


def default_potential(alpha: float = 0.3) -> PotentialSpec:
    """F(x) = 2 cos x on the circle."""
    return PotentialSpec(alpha, 1, {(1,): 1.0, (-1,): 1.0})


def coupling_potential(spec: PotentialSpec, L: float) -> PotentialSpec:
    """Same F with the constant coupling L**-alpha (decaying-coupling model)."""
    return PotentialSpec(spec.alpha, spec.dim, spec.fourier, CONSTANT_COUPLING, L ** (-spec.alpha))


def eval_a(spec: PotentialSpec, t):
    """Decay factor a(t); works on scalars and arrays."""
    if spec.profile == CONSTANT_COUPLING:
        return spec.scale if np.isscalar(t) else np.full(np.shape(t), spec.scale, dtype=float)
    t = np.asarray(t, dtype=float)
    out = (1.0 + t * t) ** (-0.5 * spec.alpha)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class NoisePath:
    """One discretized torus Brownian path with F sampled along it."""

    dt: float
    steps: int
    positions: np.ndarray
    f_values: np.ndarray
    seed: tuple[int, int]

    def __post_init__(self):
        self.positions.setflags(write=False)
        self.f_values.setflags(write=False)

    @property
    def horizon(self) -> float:
        return self.dt * self.steps

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.dt

    def to_csv(self, path) -> None:
        dim = self.positions.shape[1]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", *[f"x_{i + 1}" for i in range(dim)], "F"])
            for t, x, f in zip(self.times, self.positions, self.f_values):
                writer.writerow([repr(float(t)), *[repr(float(v)) for v in x], repr(float(f))])


def zero_path(horizon: float, dt: float, dim: int = 1) -> NoisePath:
    """Deterministic path with F == 0, for free-operator checks."""
    steps = _step_count(horizon, dt)
    return NoisePath(horizon / steps, steps, np.zeros((steps + 1, dim)), np.zeros(steps + 1), (0, 0))


def _step_count(horizon, dt) -> int:
    if not (horizon > 0) or not (dt > 0):
        raise ParameterError(f"horizon and dt must be positive, got horizon={horizon}, dt={dt}")
    return max(1, int(round(horizon / dt)))


def sample_path(spec: PotentialSpec, horizon: float, dt: float, seed=(0, 0)) -> NoisePath:
    """Sample X on [0, horizon] started from the uniform (stationary) law.

    The step is adjusted to ``horizon / round(horizon / dt)`` so the last grid
    point sits exactly on the horizon.
    """
    steps = _step_count(horizon, dt)
    dt = horizon / steps
    master, index = seed
    gen = _rng.generator(master, index, _rng.STREAM_PATH)
    x0 = gen.uniform(0.0, 2 * math.pi, size=spec.dim)
    sigma = math.sqrt(2.0 * GENERATOR_SCALE * dt)
    increments = gen.normal(0.0, sigma, size=(steps, spec.dim))
    positions = np.empty((steps + 1, spec.dim))
    positions[0] = x0
    np.cumsum(increments, axis=0, out=positions[1:])
    positions[1:] += x0
    np.mod(positions, 2 * math.pi, out=positions)
    return NoisePath(dt, steps, positions, spec.evaluate_f(positions), (int(master), int(index)))


def resolvent_coeffs(spec: PotentialSpec, kappa: float) -> dict:
    """Fourier coefficients of (L + 2i kappa)^{-1} F."""
    if kappa == 0:
        raise SingularResolventError("resolvent (L + 2i kappa)^{-1} is singular at kappa = 0")
    out = {}
    for k, c in spec.fourier.items():
        k2 = float(sum(v * v for v in k))
        out[k] = c / complex(-GENERATOR_SCALE * k2, 2.0 * kappa)
    return out


@dataclass(frozen=True)
class SpectralConstants:
    e0: float
    kappa0: float
    resolvent: dict
    c_e0: float
    beta_e0: float
    psi_mean: float


def compute_constants(spec: PotentialSpec, e0: float) -> SpectralConstants:
    """C(E0) = <grad g, grad g>, beta(E0) = 8 E0 / C(E0) and <psi>.

    ``c_e0`` comes from the gradient norm of the resolvent; ``psi_mean`` from
    ``-2 Re <F g>``. The two routes agree because the generator is self-adjoint.
    """
    if not (e0 > 0):
        raise ParameterError(f"reference energy must be positive, got {e0}")
    kappa0 = math.sqrt(e0)
    g = resolvent_coeffs(spec, kappa0)
    c_e0 = 0.0
    f_dot_g = 0j
    for k, gk in g.items():
        k2 = float(sum(v * v for v in k))
        c_e0 += k2 * abs(gk) ** 2
        f_dot_g += spec.fourier[k].conjugate() * gk
    if c_e0 == 0.0:
        raise DegeneratePotentialError("F vanishes identically: C(E0) = 0 and beta is undefined")
    psi_mean = -2.0 * f_dot_g.real
    return SpectralConstants(e0, kappa0, g, c_e0, 8.0 * e0 / c_e0, psi_mean)
