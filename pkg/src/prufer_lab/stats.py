"""Statistical checks for point-process samples and phase diagnostics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _st

from prufer_lab import rng as _rng
from prufer_lab.errors import ParameterError

SIGNIFICANCE = 0.01
PERMUTATIONS = 10_000
MIN_EXPECTED = 5.0


@dataclass(frozen=True)
class TestReport:
    test: str
    statistic: float
    p_value: float | None
    n: int
    target: str
    passed: bool
    config_echo: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.p_value is not None and not (0.0 <= self.p_value <= 1.0):
            raise ParameterError(f"p-value {self.p_value} outside [0, 1]")

    def to_json(self) -> dict:
        out = {
            "test": self.test,
            "statistic": _finite_or_none(self.statistic),
            "p_value": self.p_value,
            "n": self.n,
            "target": self.target,
            "pass": bool(self.passed),
            "config_echo": self.config_echo,
        }
        if self.extra:
            out["extra"] = {k: _finite_or_none(v) for k, v in self.extra.items()}
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _finite_or_none(v):
    if isinstance(v, (float, np.floating)):
        return float(v) if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


@dataclass(frozen=True)
class PointProcessSample:
    atoms: np.ndarray
    window: tuple[float, float]
    realization: int = 0

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=float)
        lo, hi = self.window
        if np.any(np.diff(a) < 0):
            raise ParameterError("atoms must be sorted")
        if a.size and (a[0] < lo or a[-1] > hi):
            raise ParameterError("atoms must lie inside the window")
        object.__setattr__(self, "atoms", a)

    @property
    def count(self) -> int:
        return int(self.atoms.size)

    def gaps(self) -> np.ndarray:
        return np.diff(self.atoms)


def ks_exponential(samples, rate: float, significance: float = SIGNIFICANCE) -> TestReport:
    """Two-sided KS test against the Exp(rate) law, asymptotic p-value."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ParameterError("KS test needs at least one sample")
    if not (rate > 0):
        raise ParameterError("rate must be positive")
    res = _st.kstest(x, "expon", args=(0.0, 1.0 / rate), method="asymp")
    p = float(res.pvalue)
    return TestReport("ks_exponential", float(res.statistic), p, int(x.size),
                      f"Exp(rate={rate:.6g})", p > significance)


def dispersion_index(counts) -> float:
    c = np.asarray(counts, dtype=float)
    m = c.mean()
    if c.size < 2:
        return math.nan
    v = c.var(ddof=1)
    if m == 0:
        return 0.0 if v == 0 else math.nan
    return float(v / m)


def _merged_poisson_bins(counts, mean):
    """Observed / expected frequencies with tails merged until every bin expects >= 5."""
    c = np.asarray(counts, dtype=np.int64)
    n = c.size
    top = max(int(c.max()), int(mean + 10 * math.sqrt(mean) + 10))
    ks = np.arange(top + 1)
    probs = _st.poisson.pmf(ks, mean)
    probs[-1] += _st.poisson.sf(top, mean)
    obs = np.bincount(c, minlength=top + 1).astype(float)
    exp = probs * n
    o_bins, e_bins = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(obs, exp):
        o_acc += o
        e_acc += e
        if e_acc >= MIN_EXPECTED:
            o_bins.append(o_acc)
            e_bins.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if e_bins:
            o_bins[-1] += o_acc
            e_bins[-1] += e_acc
        else:
            o_bins.append(o_acc)
            e_bins.append(e_acc)
    return np.array(o_bins), np.array(e_bins)


def poisson_dispersion(counts, expected_mean: float | None = None,
                       significance: float = SIGNIFICANCE, band=(0.8, 1.2)) -> TestReport:
    """Index of dispersion plus a chi-square fit of the count histogram to Poisson."""
    c = np.asarray(counts)
    if c.size == 0:
        raise ParameterError("no counts")
    c = c.astype(np.int64)
    if np.any(c < 0):
        raise ParameterError("counts must be non-negative")
    mean = float(c.mean())
    target_mean = mean if expected_mean is None else float(expected_mean)
    disp = dispersion_index(c)
    if target_mean <= 0 or math.isnan(disp):
        return TestReport("poisson_dispersion", disp, None, int(c.size), "degenerate: zero mean",
                          False, extra={"mean": mean, "dispersion": disp})
    obs, exp = _merged_poisson_bins(c, target_mean)
    if obs.size < 2:
        p = None
        chi2 = math.nan
    else:
        chi2 = float(np.sum((obs - exp) ** 2 / exp))
        dof = obs.size - 1
        p = float(_st.chi2.sf(chi2, dof))
    ok = band[0] <= disp <= band[1] and (p is None or p > significance)
    return TestReport("poisson_dispersion", disp, p, int(c.size), f"Poisson(mean={target_mean:.6g})", ok,
                      extra={"mean": mean, "chi2": chi2, "bins": int(obs.size)})


def uniformity_test(phases, significance: float = SIGNIFICANCE) -> TestReport:
    """KS against Uniform[0, pi) plus the mean resultant length of exp(2 i phi)."""
    x = np.asarray(phases, dtype=float)
    if x.size == 0:
        raise ParameterError("no phases")
    if np.any(x < 0) or np.any(x >= math.pi):
        raise ParameterError("phases must lie in [0, pi)")
    res = _st.kstest(x, "uniform", args=(0.0, math.pi), method="asymp")
    resultant = float(abs(np.mean(np.exp(2j * x))))
    p = float(res.pvalue)
    return TestReport("uniformity", float(res.statistic), p, int(x.size), "Uniform[0, pi)",
                      p > significance, extra={"resultant_length": resultant})


def independence_test(count_pairs, shuffles: int = PERMUTATIONS, seed: int = 0,
                      significance: float = SIGNIFICANCE, max_abs_corr: float | None = None) -> TestReport:
    """Pearson correlation of paired counts with a permutation p-value."""
    pairs = np.asarray(count_pairs, dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ParameterError("count_pairs must have shape (m, 2)")
    x, y = pairs[:, 0], pairs[:, 1]
    n = x.size
    if n < 2 or np.all(x == x[0]) or np.all(y == y[0]):
        return TestReport("independence", math.nan, None, int(n), "degenerate: constant column", False)
    r = float(np.corrcoef(x, y)[0, 1])
    gen = _rng.generator(seed, 0, _rng.STREAM_PERMUTATION)
    xc = (x - x.mean()) / x.std()
    yc = (y - y.mean()) / y.std()
    hits = 0
    block = 1000
    done = 0
    while done < shuffles:
        b = min(block, shuffles - done)
        idx = np.argsort(gen.random((b, n)), axis=1)
        rp = (yc[idx] @ xc) / n
        hits += int(np.sum(np.abs(rp) >= abs(r) - 1e-12))
        done += b
    p = (hits + 1) / (shuffles + 1)
    ok = p > significance and (max_abs_corr is None or abs(r) < max_abs_corr)
    return TestReport("independence", r, p, int(n), "zero correlation", ok)


def nesting_measure(jumps_lam, jumps_lam_prime, tau: float) -> float:
    """Fraction of lambda-jumps that have a lambda'-jump within tau."""
    a = np.sort(np.asarray(jumps_lam, dtype=float))
    b = np.sort(np.asarray(jumps_lam_prime, dtype=float))
    if a.size == 0:
        return 1.0
    if b.size == 0:
        return 0.0
    j = np.searchsorted(b, a)
    below = b[np.clip(j - 1, 0, b.size - 1)]
    above = b[np.clip(j, 0, b.size - 1)]
    d = np.minimum(np.abs(a - below), np.abs(above - a))
    return float(np.mean(d <= tau))


def _fractional(theta):
    x = np.asarray(theta, dtype=float)
    out = x - np.floor(x / math.pi) * math.pi
    return np.where(out >= math.pi, 0.0, out)


def _as_series(path):
    if hasattr(path, "times"):
        return np.asarray(path.times, dtype=float), np.asarray(path.values, dtype=float)
    t, v = path
    return np.asarray(t, dtype=float), np.asarray(v, dtype=float)


def _time_fraction(t, mask):
    """Measure of {mask} per unit horizon, mask[i] standing for (t[i-1], t[i]]."""
    dt = np.diff(t)
    horizon = t[-1] - t[0]
    return float(np.sum(dt * mask[1:]) / horizon)


def time_above_threshold(paths, threshold: float) -> float:
    """Ensemble mean of the time fraction with {Theta}_pi >= threshold."""
    if not (0 < threshold < math.pi):
        raise ParameterError("threshold must lie in (0, pi)")
    vals = []
    for p in paths:
        t, v = _as_series(p)
        vals.append(_time_fraction(t, _fractional(v) >= threshold))
    return float(np.mean(vals)) if vals else math.nan


def order_violation_measure(paths_lam, paths_lam_prime) -> float:
    """Ensemble mean of the time fraction with {Theta(lam')}_pi <= {Theta(lam)}_pi."""
    vals = []
    for p, q in zip(paths_lam, paths_lam_prime):
        t, v = _as_series(p)
        t2, w = _as_series(q)
        if t.shape != t2.shape or not np.allclose(t, t2):
            raise ParameterError("paired paths must share a time grid")
        vals.append(_time_fraction(t, _fractional(w) <= _fractional(v)))
    return float(np.mean(vals)) if vals else math.nan


@dataclass(frozen=True)
class IntensityEstimate:
    edges: np.ndarray
    rate: np.ndarray
    stderr: np.ndarray
    target: np.ndarray
    realizations: int

    @property
    def z_scores(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.rate - self.target) / self.stderr

    def within(self, k: float = 2.0) -> np.ndarray:
        return np.abs(self.rate - self.target) <= k * self.stderr

    def to_csv(self, path) -> None:
        np.savetxt(path, np.column_stack([self.edges[:-1], self.edges[1:], self.rate, self.stderr, self.target]),
                   delimiter=",", header="lo,hi,rate,stderr,target", comments="")


def empirical_intensity(samples, bins, target=None) -> IntensityEstimate:
    """Per-realization binned rate, averaged, with standard errors across realizations.

    ``target`` is a callable density evaluated by bin average (or a constant).
    """
    edges = np.asarray(bins, dtype=float)
    m = len(samples)
    widths = np.diff(edges)
    if m == 0:
        z = np.zeros(edges.size - 1)
        return IntensityEstimate(edges, z, z.copy(), _target(target, edges), 0)
    per = np.array([np.histogram(np.asarray(s, dtype=float), edges)[0] for s in samples], dtype=float)
    rate = per.mean(axis=0) / widths
    se = per.std(axis=0, ddof=1) / math.sqrt(m) / widths if m > 1 else np.full(widths.shape, math.nan)
    return IntensityEstimate(edges, rate, se, _target(target, edges), m)


def _target(target, edges):
    if target is None:
        return np.full(edges.size - 1, math.nan)
    if callable(target):
        # bin average of the density by Gauss-Legendre
        nodes, weights = np.polynomial.legendre.leggauss(16)
        lo, hi = edges[:-1, None], edges[1:, None]
        x = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        return 0.5 * np.sum(weights * target(x), axis=1)
    return np.full(edges.size - 1, float(target))

