"""Mean explosion time of the upper stationary diffusion S_+.

S_+ has drift ``-W(r) = lam (1+eps) cosh_+(r) + (C^2/2) tanh_{+,eps}(r)`` and
noise ``C dW``. Its mean time to reach +inf from r solves

    (C^2/2) f'' - W f' = -1,   f(+inf) = 0,

whose solution is the double integral

    f(r) = (2/C^2) int_r^inf dx int_{-inf}^x dy exp(phi(x) - phi(y)),  phi = 2 V / C^2,

with V an antiderivative of W. For large C the mean tends to
``(1/lam) int_r^inf sech = (pi - 2 arctan e^r) / lam``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import integrate, optimize

from prufer_lab.errors import AsymptoticRegimeError, ParameterError, QuadratureError

TAIL_TOL = 1e-12
REL_TOL = 1e-8
MAX_DOUBLINGS = 10
INITIAL_SPACING = 0.02


def _log_cosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2.0 * x)) - math.log(2.0)


@dataclass(frozen=True)
class DriftPotential:
    c_n: float
    lam: float
    delta: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self):
        if not (self.c_n > 0) or not (self.lam > 0):
            raise ParameterError("c_n and lambda must be positive")
        if self.delta < 0 or not (0 <= self.epsilon < 1):
            raise ParameterError("need delta >= 0 and epsilon in [0, 1)")

    @property
    def lambda_tilde(self) -> float:
        return (1 + self.epsilon) * self.lam / (1 - self.epsilon)

    @property
    def half_c2(self) -> float:
        return 0.5 * self.c_n**2

    @property
    def well_separated(self) -> bool:
        """True when C^2 dominates lambda_tilde, where the two drift roots exist."""
        return self.c_n**2 > 10.0 * self.lambda_tilde

    def drift(self, r):
        """lam (1+eps) cosh_+(r) + (C^2/2) tanh_{+,eps}(r)."""
        r = np.asarray(r, dtype=float)
        d, e = self.delta, self.epsilon
        tilt = np.where(r > -d, 1 + e, 1 - e)
        out = self.lam * (1 + e) * np.cosh(np.abs(r) + d) + self.half_c2 * tilt * np.tanh(r + d)
        return float(out) if out.ndim == 0 else out

    def W_plus(self, r):
        return -self.drift(r)

    def V_plus(self, r):
        """Continuous antiderivative of W_plus.

        Both pieces are anchored at their kink (cosh part at 0, tanh part at
        -delta), so V is continuous everywhere.
        """
        r = np.asarray(r, dtype=float)
        d, e = self.delta, self.epsilon
        cosh_part = np.sign(r) * (np.sinh(np.abs(r) + d) - math.sinh(d))
        tilt = np.where(r > -d, 1 + e, 1 - e)
        out = -(self.lam * (1 + e) * cosh_part + self.half_c2 * tilt * _log_cosh(r + d))
        return float(out) if out.ndim == 0 else out

    def phi(self, r):
        return 2.0 * self.V_plus(r) / self.c_n**2

    def to_table(self) -> dict:
        return {"c_n": self.c_n, "lambda": self.lam, "delta": self.delta, "epsilon": self.epsilon}


def critical_points(pot: DriftPotential) -> tuple[float, float]:
    """Roots a_n < b_n of W_plus: the bottom of the well and the top of the barrier.

    Asymptotically a_n ~ delta + log(lt / C^2) and b_n ~ -delta - (2 lt / C^2) cosh(2 delta),
    lt = lambda_tilde; both are refined with Brent's method.
    """
    lt, c2 = pot.lambda_tilde, pot.c_n**2
    a_seed = pot.delta + math.log(lt / c2)
    left = a_seed - 5.0
    right = max(pot.delta, 0.0) + 1.0
    # the drift is most negative between the two roots
    res = optimize.minimize_scalar(pot.drift, bounds=(left, 0.0), method="bounded",
                                   options={"xatol": 1e-12})
    r_min = float(res.x)
    if not (pot.drift(r_min) < 0) or not (pot.drift(left) > 0) or not (pot.drift(right) > 0):
        raise AsymptoticRegimeError(
            f"W_plus has no separated roots for C_n={pot.c_n}, lambda={pot.lam}: C_n^2 must dominate lambda"
        )
    a = optimize.brentq(pot.drift, left, r_min, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    b = optimize.brentq(pot.drift, r_min, right, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return a, b


def asymptotic_critical_points(pot: DriftPotential) -> tuple[float, float]:
    lt, c2 = pot.lambda_tilde, pot.c_n**2
    return pot.delta + math.log(lt / c2), -pot.delta - 2 * lt / c2 * math.cosh(2 * pot.delta)


@numba.njit(cache=True)
def _escape_profile(x, phi):
    """u(x) = int_{x_0}^x exp(phi(x) - phi(y)) dy on the grid x.

    Cell by cell, u_{i+1} = e^D u_i + int_cell exp(phi_{i+1} - phi(y)) dy with
    D = phi_{i+1} - phi_i and phi taken linear inside the cell. Only non-positive
    exponents of order one appear, so the recursion stays finite where phi is
    steep and the raw exponentials overflow.
    """
    n = x.shape[0]
    u = np.empty(n)
    u[0] = 0.0
    for i in range(n - 1):
        h = x[i + 1] - x[i]
        d = phi[i + 1] - phi[i]
        if abs(d) < 1e-8:
            cell = h * (1.0 + 0.5 * d)
        else:
            cell = h * math.expm1(d) / d
        u[i + 1] = math.exp(d) * u[i] + cell
    return u


def _grid(knots, spacing):
    pieces = []
    for lo, hi in zip(knots[:-1], knots[1:]):
        m = max(2, int(math.ceil((hi - lo) / spacing)))
        pieces.append(np.linspace(lo, hi, m + 1)[:-1])
    pieces.append(np.array([knots[-1]]))
    return np.concatenate(pieces)


def _mean_time(pot, r, lo, hi, spacing):
    """(2/C^2) int_r^hi u(x) dx and the two truncation ratios."""
    knots = sorted({k for k in (lo, hi, r, -pot.delta, 0.0) if lo <= k <= hi})
    x = _grid(knots, spacing)
    phi = pot.phi(x)
    u = _escape_profile(x, phi)
    ir = int(np.searchsorted(x, r))
    value = 2.0 / pot.c_n**2 * integrate.trapezoid(u[ir:], x[ir:])
    # mass entering from below lo, and u left at the right edge
    left = math.exp(min(0.0, float(np.min(phi[ir:]) - phi[0])))
    right = u[-1] / u[ir:].max()
    return value, (left, right)


def mean_explosion_quadrature(pot: DriftPotential, r: float, truncation: float | None = None,
                              rel_tol: float = REL_TOL) -> float:
    """E[time for S_+ to reach +inf | S_+(0) = r].

    Evaluates the double integral on a grid that has the kinks of the drift
    and the start point as nodes. The domain is widened until both
    truncation ratios fall below 1e-12, then the grid is halved until
    successive values agree to ``rel_tol``.
    """
    if not math.isfinite(r):
        raise ParameterError(f"start point must be finite, got {r}")
    try:
        a, b = critical_points(pot)
    except AsymptoticRegimeError:
        a, b = min(r, 0.0), 0.0
    width = 4.0 if truncation is None else float(truncation)
    for _ in range(MAX_DOUBLINGS + 1):
        lo, hi = min(a, r) - width, max(b, r, 0.0) + width
        _, tails = _mean_time(pot, r, lo, hi, INITIAL_SPACING)
        if max(tails) < TAIL_TOL:
            break
        width *= 2.0
    else:
        raise QuadratureError(f"tails did not decay after {MAX_DOUBLINGS} doublings of the domain")
    spacing = INITIAL_SPACING
    prev, _ = _mean_time(pot, r, lo, hi, spacing)
    for _ in range(MAX_DOUBLINGS + 4):
        spacing /= 2.0
        value, _ = _mean_time(pot, r, lo, hi, spacing)
        if abs(value - prev) <= rel_tol * abs(value):
            return value
        prev = value
    raise QuadratureError(f"grid refinement did not reach relative tolerance {rel_tol}")


def limit_mean(lam: float, r: float) -> float:
    """(1/lam) int_r^inf dx / cosh x = (pi - 2 arctan e^r) / lam."""
    if not (lam > 0):
        raise ParameterError(f"lambda must be positive, got {lam}")
    # pi - 2 arctan(e^r) = 2 arctan(e^-r), which keeps precision for large r
    return 2.0 * math.atan(math.exp(-r)) / lam if r > -700 else math.pi / lam


def laplace_limit(xi: float) -> float:
    """Laplace transform 1/(1 + xi) of the unit exponential law."""
    if not (xi >= 0):
        raise ParameterError(f"xi must be non-negative, got {xi}")
    return 1.0 / (1.0 + xi)


@dataclass(frozen=True)
class ExplosionRecord:
    params: dict
    times: np.ndarray = field(default_factory=lambda: np.empty(0))
    quadrature_mean: float | None = None

    def __post_init__(self):
        if np.any(self.times <= 0):
            raise ParameterError("explosion times must be positive")
        if self.quadrature_mean is not None and not (self.quadrature_mean > 0):
            raise ParameterError("mean explosion time must be positive")

    @property
    def mean(self) -> float:
        return float(np.mean(self.times))

    @property
    def standard_error(self) -> float:
        return float(np.std(self.times, ddof=1) / math.sqrt(self.times.shape[0]))

    def laplace(self, xi: float, rate: float = 1.0):
        """Empirical E[exp(-xi rate T)] and its standard error."""
        v = np.exp(-xi * rate * self.times)
        return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.shape[0]))


def sweep(c_values, lambdas, rs, delta: float = 0.0, epsilon: float = 0.0):
    """Rows (C_n, lambda, r, mean_time, limit_value) over a parameter grid."""
    rows = []
    for c in c_values:
        for lam in lambdas:
            pot = DriftPotential(float(c), float(lam), delta, epsilon)
            for r in rs:
                rows.append((float(c), float(lam), float(r), mean_explosion_quadrature(pot, float(r)),
                             limit_mean(float(lam), float(r))))
    return rows


def write_sweep_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["C_n", "lambda", "r", "mean_time", "limit_value"])
        for row in rows:
            w.writerow([repr(float(v)) for v in row])
