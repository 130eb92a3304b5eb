"""Limiting diffusions of the relative Prüfer phase.

Four families share this module:

* the Sine_beta phase equation ``d a = lam (b/4) e^{-b t/4} dt + Re[(e^{ia} - 1) dZ]``;
* the reduced relative phase ``dTheta = lam dt + n^{1/2-alpha} t^{-alpha} Re[(e^{2i Theta} - 1) dZ]``;
* its log-tan form ``R = log tan(Theta/2)``, a diffusion with constant noise
  ``C_n dW`` that explodes to +inf each time Theta crosses a multiple of pi;
* the stationary comparison processes ``S_+`` / ``S_-`` whose drifts use the
  widened envelopes ``cosh_{+-}`` and tilted ``tanh_{+-,eps}``.

Riccati-type processes are integrated with Euler-Maruyama and explode when
they reach ``r_cap``, restarting at ``-r_cap``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field, replace

import numba
import numpy as np

from prufer_lab import rng as _rng
from prufer_lab.errors import ParameterError
from prufer_lab.torus import PotentialSpec, compute_constants

DEFAULT_R_CAP = 15.0
# Largest drift displacement allowed in one step; bounds the Euler step where
# cosh(R) is large.
DEFAULT_MAX_DRIFT_STEP = 0.05
DEFAULT_DT_FACTOR = 0.004
NEAR_CAP_MARGIN = 3.0
NEAR_CAP_REFINE = 8
COMPLEX_BM_VARIANCE = 2.0
SNAP_DISTANCE = 0.5
SNAP_WARN_FRACTION = 0.05


class PathKind(enum.Enum):
    SINE_BETA = "sine_beta"
    RELATIVE_PHASE = "relative_phase"
    RICCATI = "riccati"
    STATIONARY_PLUS = "stationary_plus"
    STATIONARY_MINUS = "stationary_minus"


class TimePower(enum.Enum):
    UNIFORM = "uniform"
    GAMMA_POWER = "gamma_power"


class Envelope(enum.Enum):
    COSH_PLUS = "cosh_plus"
    COSH_MINUS = "cosh_minus"
    TANH_PLUS_EPS = "tanh_plus_eps"
    TANH_MINUS_EPS = "tanh_minus_eps"


# process codes used inside the kernels
_R, _SPLUS, _SMINUS = 0, 1, 2
_KIND_CODE = {PathKind.RICCATI: _R, PathKind.STATIONARY_PLUS: _SPLUS, PathKind.STATIONARY_MINUS: _SMINUS}


def gamma_of(alpha: float) -> float:
    if not (0 < alpha < 0.5):
        raise ParameterError(f"alpha must lie in (0, 1/2), got {alpha}")
    return 1.0 / (1.0 - 2.0 * alpha)


def tilt_exponent(alpha: float) -> float:
    """j0 alpha - 1 with j0 the least j such that 1 - j alpha < 0."""
    j0 = math.floor(1.0 / alpha) + 1
    return j0 * alpha - 1.0


@dataclass(frozen=True)
class SdeConfig:
    c_n: float
    lam: float
    gamma: float
    delta: float
    epsilon: float
    dt: float | None = None
    r_cap: float = DEFAULT_R_CAP
    seed: int = 0
    complex_bm_variance: float = COMPLEX_BM_VARIANCE
    max_drift_step: float = DEFAULT_MAX_DRIFT_STEP

    def __post_init__(self):
        if not (self.gamma > 1):
            raise ParameterError(f"gamma must exceed 1, got {self.gamma}")
        if not (self.c_n >= 0):
            raise ParameterError(f"c_n must be non-negative, got {self.c_n}")
        if not (self.delta >= 0):
            raise ParameterError(f"delta must be non-negative, got {self.delta}")
        if not (0 <= self.epsilon < 1):
            raise ParameterError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if not (self.r_cap > 0):
            raise ParameterError(f"r_cap must be positive, got {self.r_cap}")
        if self.complex_bm_variance <= 0 or self.max_drift_step <= 0:
            raise ParameterError("complex_bm_variance and max_drift_step must be positive")
        if self.dt is None:
            object.__setattr__(self, "dt", DEFAULT_DT_FACTOR / max(self.c_n**2, 1.0))
        if not (self.dt > 0):
            raise ParameterError(f"dt must be positive, got {self.dt}")

    @classmethod
    def from_operator(cls, spec: PotentialSpec, e0: float, n: float, lam: float,
                      delta_const: float = 1.0, epsilon_const: float = 1.0, **kw) -> "SdeConfig":
        """Constants of the Riccati diffusion at scale n for the operator ``spec``.

        C_n = kappa0^{-1} (<psi>/2)^{1/2} gamma^{1/2} n^{1/(2 gamma)},
        delta = delta_const n^{-alpha}, epsilon = epsilon_const n^{-(j0 alpha - 1)}.
        """
        gamma = gamma_of(spec.alpha)
        consts = compute_constants(spec, e0)
        c_n = math.sqrt(consts.psi_mean / 2.0) * math.sqrt(gamma) * n ** (0.5 / gamma) / consts.kappa0
        delta = delta_const * n ** (-spec.alpha)
        epsilon = epsilon_const * n ** (-tilt_exponent(spec.alpha))
        return cls(c_n, lam, gamma, delta, epsilon, **kw)

    def to_table(self) -> dict:
        return {
            "c_n": self.c_n, "lambda": self.lam, "gamma": self.gamma, "delta": self.delta,
            "epsilon": self.epsilon, "dt": self.dt, "r_cap": self.r_cap, "seed": self.seed,
            "complex_bm_variance": self.complex_bm_variance, "max_drift_step": self.max_drift_step,
        }

    @classmethod
    def from_table(cls, table) -> "SdeConfig":
        t = dict(table)
        return cls(
            float(t["c_n"]), float(t.get("lambda", math.pi)), float(t["gamma"]),
            float(t.get("delta", 0.0)), float(t.get("epsilon", 0.0)),
            None if t.get("dt") is None else float(t["dt"]),
            float(t.get("r_cap", DEFAULT_R_CAP)), int(t.get("seed", 0)),
            float(t.get("complex_bm_variance", COMPLEX_BM_VARIANCE)),
            float(t.get("max_drift_step", DEFAULT_MAX_DRIFT_STEP)),
        )


@dataclass(frozen=True)
class SdePath:
    times: np.ndarray
    values: np.ndarray
    explosions: np.ndarray
    kind: PathKind
    lam: float = 0.0

    def __post_init__(self):
        if np.any(np.diff(self.explosions) <= 0):
            raise ParameterError("explosion times must be strictly increasing")

    @property
    def lifted(self) -> np.ndarray:
        """Phase k pi + 2 arctan(e^R), k = explosions so far (Riccati kinds)."""
        k = np.searchsorted(self.explosions, self.times, side="right")
        return k * np.pi + 2.0 * np.arctan(np.exp(self.values))

    def to_csv(self, path) -> None:
        np.savetxt(path, np.column_stack([self.times, self.values]), delimiter=",",
                   header="t,value", comments="")


# ---------------------------------------------------------------- envelopes

@numba.njit(cache=True, inline="always")
def _cosh_plus(r, delta):
    return math.cosh(abs(r) + delta)


@numba.njit(cache=True, inline="always")
def _cosh_minus(r, delta):
    return math.cosh(max(abs(r) - delta, 0.0))


@numba.njit(cache=True, inline="always")
def _tanh_plus_eps(r, delta, eps):
    if r > -delta:
        return (1.0 + eps) * math.tanh(r + delta)
    return (1.0 - eps) * math.tanh(r + delta)


@numba.njit(cache=True, inline="always")
def _tanh_minus_eps(r, delta, eps):
    if r > delta:
        return (1.0 - eps) * math.tanh(r - delta)
    return (1.0 + eps) * math.tanh(r - delta)


def envelope(kind: Envelope | str, r, delta: float, epsilon: float = 0.0):
    """Drift envelopes over the window |s - r| < delta, in closed form."""
    kind = Envelope(kind)
    if delta < 0 or not (0 <= epsilon < 1):
        raise ParameterError("need delta >= 0 and epsilon in [0, 1)")
    r = np.asarray(r, dtype=float)
    if kind is Envelope.COSH_PLUS:
        out = np.cosh(np.abs(r) + delta)
    elif kind is Envelope.COSH_MINUS:
        out = np.cosh(np.maximum(np.abs(r) - delta, 0.0))
    elif kind is Envelope.TANH_PLUS_EPS:
        th = np.tanh(r + delta)
        out = np.where(r > -delta, (1 + epsilon) * th, (1 - epsilon) * th)
    else:
        th = np.tanh(r - delta)
        out = np.where(r > delta, (1 - epsilon) * th, (1 + epsilon) * th)
    return float(out) if out.ndim == 0 else out


@numba.njit(cache=True)
def _drift(code, r, lam_t, half_c2, delta, eps):
    if code == 0:
        return lam_t * math.cosh(r) + half_c2 * math.tanh(r)
    if code == 1:
        return lam_t * (1.0 + eps) * _cosh_plus(r, delta) + half_c2 * _tanh_plus_eps(r, delta, eps)
    return lam_t * (1.0 - eps) * _cosh_minus(r, delta) + half_c2 * _tanh_minus_eps(r, delta, eps)


NORMAL_BLOCK = 4096


@numba.njit(cache=True, inline="always")
def _next_normal(buf, pos):
    """Draw from a block of standard normals, refilling when exhausted.

    Block draws are several times faster than scalar ones inside kernels.
    """
    if pos[0] == buf.shape[0]:
        buf[:] = np.random.standard_normal(buf.shape[0])
        pos[0] = 0
    z = buf[pos[0]]
    pos[0] += 1
    return z


# ----------------------------------------------------------- Riccati kernel

@numba.njit(cache=True)
def _grow(a, n):
    b = np.empty((a.shape[0], 2 * n) if a.ndim == 2 else 2 * n)
    if a.ndim == 2:
        b[:, :n] = a[:, :n]
    else:
        b[:n] = a[:n]
    return b


@numba.njit(cache=True)
def _riccati_kernel(codes, x0, lam, c, delta, eps, gamma, power, horizon, dt, dmax,
                    r_cap, seed, record_every, stop_at_first, noise_on):
    np.random.seed(seed)
    buf = np.empty(NORMAL_BLOCK)
    pos = np.array([NORMAL_BLOCK])
    k = codes.shape[0]
    x = x0.copy()
    half_c2 = 0.5 * c * c
    cap = 1024
    rec_t = np.empty(cap)
    rec_x = np.empty((k, cap))
    nrec = 0
    ecap = 64
    ex_t = np.empty(ecap)
    ex_p = np.empty(ecap)
    nex = 0
    if record_every > 0:
        rec_t[0] = 0.0
        for j in range(k):
            rec_x[j, 0] = x[j]
        nrec = 1
    drifts = np.empty(k)
    t = 0.0
    step = 0
    h_min = 1e-13
    done = False
    while t < horizon and not done:
        if power == 1:
            lam_t = lam * gamma * t ** (gamma - 1.0)
        else:
            lam_t = lam
        h = dt
        big = 0.0
        for j in range(k):
            drifts[j] = _drift(codes[j], x[j], lam_t, half_c2, delta, eps)
            if abs(x[j]) > r_cap - NEAR_CAP_MARGIN:
                h = dt / NEAR_CAP_REFINE
            big = max(big, abs(drifts[j]))
        if big * h > dmax:
            h = dmax / big
        if h < h_min:
            # step underflow while chasing an explosion: record it now
            h = h_min
            for j in range(k):
                if drifts[j] * h > dmax:
                    x[j] = r_cap
        if t + h > horizon:
            h = horizon - t
        dw = math.sqrt(h) * _next_normal(buf, pos) if noise_on else 0.0
        t += h
        step += 1
        for j in range(k):
            if x[j] >= r_cap:
                xn = r_cap
            else:
                xn = x[j] + drifts[j] * h + c * dw
            if xn >= r_cap:
                if nex == ecap:
                    ex_t = _grow(ex_t, ecap)
                    ex_p = _grow(ex_p, ecap)
                    ecap *= 2
                ex_t[nex] = t
                ex_p[nex] = j
                nex += 1
                xn = -r_cap
                if stop_at_first:
                    done = True
            x[j] = xn
        if record_every > 0 and (step % record_every == 0 or t >= horizon or done):
            if nrec == cap:
                rec_t = _grow(rec_t, cap)
                rec_x = _grow(rec_x, cap)
                cap *= 2
            rec_t[nrec] = t
            for j in range(k):
                rec_x[j, nrec] = x[j]
            nrec += 1
    return rec_t[:nrec], rec_x[:, :nrec], ex_t[:nex], ex_p[:nex], t


def _kernel_seed(seed, index=0):
    if isinstance(seed, tuple):
        return _rng.kernel_seed(seed[0], seed[1], _rng.STREAM_SDE)
    return _rng.kernel_seed(seed, index, _rng.STREAM_SDE)


def simulate_coupled(config: SdeConfig, kinds, horizon: float, seed=None, x0=None,
                     time_power: TimePower | str = TimePower.UNIFORM, record_every: int = 1,
                     noise: bool = True) -> list[SdePath]:
    """Processes of the given kinds driven by one Brownian motion.

    All processes share the step sequence, so their recorded values can be
    compared grid point by grid point.
    """
    if not (horizon > 0):
        raise ParameterError("horizon must be positive")
    kinds = [PathKind(k) for k in kinds]
    codes = np.array([_KIND_CODE[k] for k in kinds], dtype=np.int64)
    if x0 is None:
        x0 = -config.r_cap
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), codes.shape).copy()
    power = 1 if TimePower(time_power) is TimePower.GAMMA_POWER else 0
    seed = config.seed if seed is None else seed
    t, xs, ex_t, ex_p, _ = _riccati_kernel(
        codes, x0, config.lam, config.c_n, config.delta, config.epsilon, config.gamma, power,
        float(horizon), config.dt, config.max_drift_step, config.r_cap, _kernel_seed(seed),
        int(record_every), False, bool(noise),
    )
    return [SdePath(t, xs[j], ex_t[ex_p == j], kind, config.lam) for j, kind in enumerate(kinds)]


def simulate_riccati(config: SdeConfig, time_power: TimePower | str, horizon: float, seed=None,
                     x0: float | None = None, record_every: int = 1, noise: bool = True) -> SdePath:
    """R = log tan(Theta/2) with explosion at r_cap and restart at -r_cap.

    GammaPower uses the drift factor gamma t^{gamma-1} on the cosh term,
    Uniform uses 1.
    """
    return simulate_coupled(config, [PathKind.RICCATI], horizon, seed, x0, time_power,
                            record_every, noise)[0]


def simulate_stationary(config: SdeConfig, sign: int | str, horizon: float = 1.0, seed=None,
                        x0: float | None = None, record_every: int = 1) -> SdePath:
    kind = PathKind.STATIONARY_PLUS if sign in (1, "+", "plus") else PathKind.STATIONARY_MINUS
    if sign not in (1, -1, "+", "-", "plus", "minus"):
        raise ParameterError(f"sign must be +1 or -1, got {sign!r}")
    return simulate_coupled(config, [kind], horizon, seed, x0, TimePower.UNIFORM, record_every)[0]


def sandwich(config: SdeConfig, horizon: float, seed=None, x0: float | None = None):
    """(S_-, R, S_+) on shared noise and shared start."""
    return simulate_coupled(
        config, [PathKind.STATIONARY_MINUS, PathKind.RICCATI, PathKind.STATIONARY_PLUS],
        horizon, seed, x0,
    )


def first_explosion_times(config: SdeConfig, kind: PathKind | str, runs: int, master: int,
                          x0: float | None = None, max_time: float = 1e3, start_index: int = 0) -> np.ndarray:
    """First explosion time of ``runs`` independent copies (inf if none before max_time)."""
    code = np.array([_KIND_CODE[PathKind(kind)]], dtype=np.int64)
    start = np.array([-config.r_cap if x0 is None else float(x0)])
    out = np.empty(runs)
    for i in range(runs):
        _, _, ex_t, _, _ = _riccati_kernel(
            code, start, config.lam, config.c_n, config.delta, config.epsilon, config.gamma, 0,
            float(max_time), config.dt, config.max_drift_step, config.r_cap,
            _rng.kernel_seed(master, start_index + i, _rng.STREAM_SDE), 0, True, True,
        )
        out[i] = ex_t[0] if ex_t.shape[0] else np.inf
    return out


# ---------------------------------------------------- reduced relative phase

@numba.njit(cache=True)
def _relative_phase_kernel(lams, amp, gamma, s_end, ds, seed, record_every, theta0, max_jumps):
    np.random.seed(seed)
    buf = np.empty(NORMAL_BLOCK)
    pos = np.array([NORMAL_BLOCK])
    nl = lams.shape[0]
    steps = max(1, int(round(s_end / ds)))
    ds = s_end / steps
    sq = math.sqrt(ds)
    nrec = steps // record_every + 1 if record_every > 0 else 0
    if record_every > 0 and steps % record_every != 0:
        nrec += 1
    rec_t = np.empty(nrec)
    rec = np.empty((nl, nrec))
    th = np.full(nl, theta0)
    top = np.empty(nl, dtype=np.int64)
    for j in range(nl):
        top[j] = int(math.floor(theta0 / math.pi + 1e-9))
    jumps = np.full((nl, max_jumps), np.nan)
    nj = np.zeros(nl, dtype=np.int64)
    r = 0
    if record_every > 0:
        rec_t[0] = 0.0
        for j in range(nl):
            rec[j, 0] = theta0
        r = 1
    t_old = 0.0
    for i in range(steps):
        s1 = (i + 1) * ds
        t_new = s1**gamma
        dclock = t_new - t_old
        dx = sq * _next_normal(buf, pos)
        dy = sq * _next_normal(buf, pos)
        for j in range(nl):
            old = th[j]
            sn = math.sin(old)
            cs = math.cos(old)
            new = old + lams[j] * dclock + amp * (-2.0 * sn * sn * dx - 2.0 * sn * cs * dy)
            th[j] = new
            lev = int(math.floor(new / math.pi + 1e-9))
            while lev > top[j]:
                top[j] += 1
                y = top[j] * math.pi
                frac = (y - old) / (new - old) if new != old else 1.0
                frac = min(max(frac, 0.0), 1.0)
                if nj[j] < max_jumps:
                    jumps[j, nj[j]] = t_old + frac * dclock
                nj[j] += 1
        t_old = t_new
        if record_every > 0 and ((i + 1) % record_every == 0 or i + 1 == steps):
            rec_t[r] = t_new
            for j in range(nl):
                rec[j, r] = th[j]
            r += 1
    return rec_t[:r], rec[:, :r], th, jumps, nj


@dataclass(frozen=True)
class RelativePhaseRun:
    """Reduced relative phase for several lambdas on one noise realization."""

    lambdas: np.ndarray
    paths: list
    terminal: np.ndarray
    jumps: list = field(default_factory=list)


def noise_amplitude(alpha: float, n: float, noise_scale: float = 1.0) -> float:
    """Coefficient of Re[(e^{2i Theta} - 1) dZ] in s = t^{1/gamma} coordinates."""
    gamma = gamma_of(alpha)
    return noise_scale * math.sqrt(gamma) * n ** (0.5 / gamma)


def simulate_relative_phase_family(lambdas, alpha: float, n: float, horizon: float = 1.0, seed=0,
                                   noise_scale: float = 1.0, ds: float | None = None,
                                   record_every: int = 0, theta0: float = 0.0,
                                   max_jumps: int = 256) -> RelativePhaseRun:
    """Theta_{nt}(lambda) for each lambda on a shared complex noise, t in [0, horizon].

    Integrated in s = t^{1/gamma}, where the t^{-alpha} singularity disappears:
    dTheta = lam d(s^gamma) + sqrt(gamma) n^{1/(2 gamma)} Re[(e^{2i Theta} - 1) dZ_s].
    The clock increment is exact, so with the noise off Theta = lam t.
    """
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    if not (horizon > 0):
        raise ParameterError("horizon must be positive")
    gamma = gamma_of(alpha)
    amp = noise_amplitude(alpha, n, noise_scale)
    if ds is None:
        ds = DEFAULT_DT_FACTOR / max(4.0 * amp * amp, 1.0)
    s_end = horizon ** (1.0 / gamma)
    t, rec, th, jumps, nj = _relative_phase_kernel(
        lambdas, amp, gamma, s_end, float(ds), _kernel_seed(seed), int(record_every), float(theta0),
        int(max_jumps),
    )
    paths = [SdePath(t, rec[j], np.empty(0), PathKind.RELATIVE_PHASE, float(lam))
             for j, lam in enumerate(lambdas)] if record_every > 0 else []
    jl = [jumps[j, : min(nj[j], max_jumps)].copy() for j in range(lambdas.shape[0])]
    return RelativePhaseRun(lambdas, paths, th.copy(), jl)


def simulate_relative_phase(config: SdeConfig | None, alpha: float, n: float, horizon: float = 1.0,
                            seed=None, noise_scale: float = 1.0, record_every: int = 1) -> SdePath:
    """Single-lambda reduced relative phase; jump times stored in ``explosions``."""
    lam = math.pi if config is None else config.lam
    if seed is None:
        seed = 0 if config is None else config.seed
    run = simulate_relative_phase_family([lam], alpha, n, horizon, seed, noise_scale,
                                         record_every=record_every)
    p = run.paths[0]
    return replace(p, explosions=run.jumps[0])


# ---------------------------------------------------------------- Sine_beta

@numba.njit(cache=True)
def _sine_beta_kernel(lams, beta, steps, dt, seed, noise_sd, record_every):
    np.random.seed(seed)
    buf = np.empty(NORMAL_BLOCK)
    pos = np.array([NORMAL_BLOCK])
    nl = lams.shape[0]
    a = np.zeros(nl)
    q = beta / 4.0
    sq = math.sqrt(dt) * noise_sd
    nrec = steps // record_every + 1 if record_every > 0 else 0
    rec = np.zeros((nl, nrec))
    r = 1
    for i in range(steps):
        t0 = i * dt
        # exact integral of the drift density over the step
        clock = math.exp(-q * t0) - math.exp(-q * (t0 + dt))
        dx = sq * _next_normal(buf, pos)
        dy = sq * _next_normal(buf, pos)
        for j in range(nl):
            c = math.cos(a[j])
            s = math.sin(a[j])
            a[j] += lams[j] * clock + (c - 1.0) * dx - s * dy
        if record_every > 0 and (i + 1) % record_every == 0:
            for j in range(nl):
                rec[j, r] = a[j]
            r += 1
    return a, rec[:, :r]


@numba.njit(cache=True)
def _sine_beta_ensemble(lams, beta, steps, dt, seeds, noise_sd):
    out = np.empty((seeds.shape[0], lams.shape[0]))
    for m in range(seeds.shape[0]):
        a, _ = _sine_beta_kernel(lams, beta, steps, dt, seeds[m], noise_sd, 0)
        out[m] = a
    return out


def default_sine_beta_horizon(beta: float) -> float:
    """Horizon where the drift has spent all but e^{-10} of its mass."""
    return 40.0 / beta


@dataclass(frozen=True)
class SineBetaResult:
    lambdas: np.ndarray
    terminal: np.ndarray          # shape (runs, len(lambdas))
    snapped: np.ndarray           # terminal snapped to 2 pi Z
    far_fraction: float
    warning: str | None = None
    paths: list = field(default_factory=list)

    def counts(self, i1: int = 0, i2: int = -1) -> np.ndarray:
        """Sine_beta[lambda_i1, lambda_i2] per run."""
        return np.rint((self.snapped[:, i2] - self.snapped[:, i1]) / (2 * math.pi)).astype(np.int64)


def _snap(a):
    k = np.rint(a / (2 * math.pi))
    return 2 * math.pi * k, np.abs(a - 2 * math.pi * k)


def _sine_beta_checks(beta, lambdas, horizon, dt):
    if not (beta > 0):
        raise ParameterError(f"beta must be positive, got {beta}")
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    if np.any(np.diff(lambdas) < 0):
        raise ParameterError("lambdas must be sorted")
    horizon = default_sine_beta_horizon(beta) if horizon is None else float(horizon)
    if not (horizon > 0) or not (dt > 0):
        raise ParameterError("horizon and dt must be positive")
    steps = max(1, int(round(horizon / dt)))
    return lambdas, steps, horizon / steps


def _result(lambdas, terminal, paths=()):
    snapped, dist = _snap(terminal)
    far = float(np.mean(dist > SNAP_DISTANCE))
    msg = None
    if far > SNAP_WARN_FRACTION:
        msg = f"{far:.1%} of terminal phases are farther than {SNAP_DISTANCE} from 2*pi*Z; horizon too short"
        warnings.warn(msg, RuntimeWarning, stacklevel=3)
    return SineBetaResult(lambdas, terminal, snapped, far, msg, list(paths))


def simulate_sine_beta(beta: float, lambdas, horizon: float | None = None, dt: float = 0.01,
                       seed=0, complex_bm_variance: float = COMPLEX_BM_VARIANCE,
                       record_every: int = 0) -> SineBetaResult:
    """One realization of alpha_t(lambda) for all lambdas on a shared complex noise."""
    lambdas, steps, dt = _sine_beta_checks(beta, lambdas, horizon, dt)
    noise_sd = math.sqrt(complex_bm_variance / 2.0)
    a, rec = _sine_beta_kernel(lambdas, float(beta), steps, dt, _kernel_seed(seed), noise_sd,
                               int(record_every))
    paths = []
    if record_every > 0:
        times = np.arange(rec.shape[1]) * dt * record_every
        paths = [SdePath(times, rec[j], np.empty(0), PathKind.SINE_BETA, float(lam))
                 for j, lam in enumerate(lambdas)]
    return _result(lambdas, a[None, :], paths)


def sine_beta_ensemble(beta: float, lambdas, runs: int, master: int = 0, horizon: float | None = None,
                       dt: float = 0.01, complex_bm_variance: float = COMPLEX_BM_VARIANCE,
                       start_index: int = 0) -> SineBetaResult:
    lambdas, steps, dt = _sine_beta_checks(beta, lambdas, horizon, dt)
    seeds = _rng.kernel_seeds(master, range(start_index, start_index + runs), _rng.STREAM_SDE)
    terminal = _sine_beta_ensemble(lambdas, float(beta), steps, dt, seeds,
                                   math.sqrt(complex_bm_variance / 2.0))
    return _result(lambdas, terminal)

