"""Monte Carlo ensembles over independent realizations.

Realization ``i`` draws every random number from streams keyed by
``(master, i)``, and results are reduced in index order, so the output does
not depend on the number of worker processes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from prufer_lab.errors import PruferLabError
from prufer_lab.prufer import default_dt, fractional, terminal_phases
from prufer_lab.spectrum import jump_field, solve_window
from prufer_lab.torus import PotentialSpec, sample_path

THREADS_ENV = "PRUFER_LAB_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def fan_out(func, tasks, threads: int | None = None):
    """Map ``func`` over ``tasks`` keeping task order."""
    threads = resolve_threads(threads)
    tasks = list(tasks)
    if threads == 1 or len(tasks) < 2:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, tasks, chunksize=max(1, len(tasks) // (4 * threads))))


@dataclass
class Failure:
    index: int
    error: str


# ------------------------------------------------------------ operator side

@dataclass(frozen=True)
class OperatorTask:
    spec: PotentialSpec
    e0: float
    L: float
    window: tuple[float, float]
    master: int
    index: int
    dt: float
    lambdas: tuple[float, ...] = ()


@dataclass
class OperatorRealization:
    index: int
    atoms: np.ndarray
    expected_count: int
    phi: float
    big_theta: np.ndarray


def operator_realization(task: OperatorTask):
    try:
        path = sample_path(task.spec, task.L, task.dt, (task.master, task.index))
        res = solve_window(path, task.spec, task.L, task.e0, task.window)
        big = np.empty(0)
        if task.lambdas:
            k0 = math.sqrt(task.e0)
            th = terminal_phases(path, task.spec, [k0, *(k0 + lam / task.L for lam in task.lambdas)])
            big = th[1:] - th[0]
        return OperatorRealization(task.index, res.atoms, res.expected_count, res.phi, big)
    except PruferLabError as exc:
        return Failure(task.index, f"{type(exc).__name__}: {exc}")


@dataclass
class OperatorEnsemble:
    window: tuple[float, float]
    realizations: list
    failures: list = field(default_factory=list)

    @property
    def counts(self) -> np.ndarray:
        return np.array([r.atoms.size for r in self.realizations], dtype=np.int64)

    @property
    def gaps(self) -> np.ndarray:
        parts = [np.diff(r.atoms) for r in self.realizations]
        return np.concatenate(parts) if parts else np.empty(0)

    @property
    def phis(self) -> np.ndarray:
        return np.array([r.phi for r in self.realizations])

    @property
    def big_theta(self) -> np.ndarray:
        """Terminal relative phases, shape (runs, len(lambdas))."""
        return np.array([r.big_theta for r in self.realizations])

    def window_counts(self, lo: float, hi: float) -> np.ndarray:
        return np.array([np.sum((r.atoms >= lo) & (r.atoms < hi)) for r in self.realizations])

    @property
    def skip_rate(self) -> float:
        total = len(self.realizations) + len(self.failures)
        return len(self.failures) / total if total else 0.0


def operator_ensemble(spec: PotentialSpec, e0: float, L: float, window, runs: int, master: int = 0,
                      dt: float | None = None, lambdas=(), threads: int | None = None,
                      start_index: int = 0) -> OperatorEnsemble:
    dt = default_dt(L, math.sqrt(e0)) if dt is None else dt
    window = (float(window[0]), float(window[1]))
    tasks = [OperatorTask(spec, e0, L, window, master, i, dt, tuple(lambdas))
             for i in range(start_index, start_index + runs)]
    out = fan_out(operator_realization, tasks, threads)
    return OperatorEnsemble(window, [r for r in out if not isinstance(r, Failure)],
                            [r for r in out if isinstance(r, Failure)])


# -------------------------------------------------------------- jump field

@dataclass(frozen=True)
class JumpFieldTask:
    spec: PotentialSpec
    e0: float
    n: float
    lambda_grid: tuple[float, ...]
    t_grid: tuple[float, ...]
    master: int
    index: int
    dt: float


def jumpfield_realization(task: JumpFieldTask):
    try:
        path = sample_path(task.spec, task.n, task.dt, (task.master, task.index))
        field_ = jump_field(path, task.spec, task.e0, task.n, task.lambda_grid)
        return field_.rectangle_counts(task.t_grid)
    except PruferLabError as exc:
        return Failure(task.index, f"{type(exc).__name__}: {exc}")


@dataclass
class JumpFieldEnsemble:
    lambda_grid: np.ndarray
    t_grid: np.ndarray
    counts: np.ndarray          # (runs, len(t_grid)-1, len(lambda_grid)-1)
    failures: list = field(default_factory=list)

    @property
    def areas(self) -> np.ndarray:
        return np.outer(np.diff(self.t_grid), np.diff(self.lambda_grid))


def jumpfield_ensemble(spec: PotentialSpec, e0: float, n: float, lambda_grid, t_grid, runs: int,
                       master: int = 0, dt: float | None = None, threads: int | None = None) -> JumpFieldEnsemble:
    dt = default_dt(n, math.sqrt(e0)) if dt is None else dt
    lg = tuple(float(v) for v in lambda_grid)
    tg = tuple(float(v) for v in t_grid)
    tasks = [JumpFieldTask(spec, e0, n, lg, tg, master, i, dt) for i in range(runs)]
    out = fan_out(jumpfield_realization, tasks, threads)
    ok = [r for r in out if not isinstance(r, Failure)]
    counts = np.array(ok) if ok else np.zeros((0, len(tg) - 1, len(lg) - 1), dtype=np.int64)
    return JumpFieldEnsemble(np.array(lg), np.array(tg), counts, [r for r in out if isinstance(r, Failure)])


def boundary_phases(spec: PotentialSpec, e0: float, L: float, runs: int, master: int = 0,
                    dt: float | None = None) -> np.ndarray:
    """{theta_L(sqrt(e0))}_pi over an ensemble."""
    dt = default_dt(L, math.sqrt(e0)) if dt is None else dt
    out = np.empty(runs)
    for i in range(runs):
        path = sample_path(spec, L, dt, (master, i))
        out[i] = fractional(terminal_phases(path, spec, [math.sqrt(e0)])[0])
    return out
