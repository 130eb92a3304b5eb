"""Acceptance criteria, shared by the test-suite and the ``report`` CLI mode.

Each ``criterion_k`` returns a :class:`CriterionResult` holding the
individual checks with their measured values and targets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from prufer_lab import experiments, explosion, limit_sde, stats
from prufer_lab.spectrum import count_below, fd_count_below, solve_window
from prufer_lab.torus import GENERATOR_SCALE, compute_constants, default_potential, sample_path, zero_path

SIGNIFICANCE = 0.01

# operator ensemble (criteria 1-3, 9)
E0 = 1.0
L_OPERATOR = 400.0
RUNS_OPERATOR = 200
WINDOW = (0.0, 8 * math.pi)
THETA_LAMBDAS = (math.pi, 2 * math.pi)

# jump field (criterion 4)
RUNS_JUMPFIELD = 1600
JUMPFIELD_LAMBDAS = tuple(k * math.pi for k in range(5))
JUMPFIELD_TIMES = (0.0, 0.25, 0.5, 0.75, 1.0)

# reduced phase equation (criteria 5, 11)
ALPHA = 0.3
N_REDUCED = 1e4
RUNS_REDUCED = 500
INTENSITY_BINS = 8
TREND_NS = (1e2, 1e3, 1e4)
RUNS_TREND = 200

# explosion (criteria 6, 7)
C_EXPLOSION = 20.0
C_LARGE = 50.0
R_DEEP = -8.0
ENVELOPE_WIDTH = 0.01
RUNS_EXPLOSION = 2000
LAPLACE_XI = (0.5, 1.0, 2.0)
SANDWICH_SEEDS = 50
SANDWICH_HORIZON = 2.0
SANDWICH_TOL = 1e-6

# Sine_beta (criterion 8)
BETA = 0.05
RUNS_SINE = 2000

FD_SEEDS = 20
FD_L = 50.0


@dataclass
class Check:
    label: str
    value: float
    target: str
    ok: bool


@dataclass
class CriterionResult:
    number: int
    name: str
    checks: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.ok for c in self.checks)

    def add(self, label, value, target, ok):
        self.checks.append(Check(label, float(value), target, bool(ok)))

    def line(self) -> str:
        parts = "; ".join(f"{c.label}={c.value:.6g} [{c.target}]{'' if c.ok else ' x'}" for c in self.checks)
        return f"criterion {self.number:2d} {'PASS' if self.passed else 'FAIL'} {self.name}: {parts}"

    def to_json(self) -> dict:
        return {
            "criterion": self.number,
            "name": self.name,
            "pass": self.passed,
            "checks": [{"label": c.label, "value": c.value if math.isfinite(c.value) else None,
                        "target": c.target, "pass": c.ok} for c in self.checks],
        }


def _within(value, target, rel):
    return abs(value - target) <= rel * abs(target)


class Context:
    """Caches the expensive ensembles shared between criteria."""

    def __init__(self, master: int = 20240601, threads: int | None = 1, scale: float = 1.0):
        self.master = master
        self.threads = threads
        self.scale = scale
        self._operator = {}

    def runs(self, m: int) -> int:
        return max(2, int(round(m * self.scale)))

    def operator(self, alpha: float) -> experiments.OperatorEnsemble:
        if alpha not in self._operator:
            self._operator[alpha] = experiments.operator_ensemble(
                default_potential(alpha), E0, L_OPERATOR, WINDOW, self.runs(RUNS_OPERATOR),
                self.master, lambdas=THETA_LAMBDAS, threads=self.threads,
            )
        return self._operator[alpha]


def gap_test(ens) -> stats.TestReport:
    return stats.ks_exponential(ens.gaps, 1.0 / math.pi, SIGNIFICANCE)


def criterion_1(ctx: Context) -> CriterionResult:
    res = CriterionResult(1, "Poisson statistics of rescaled eigenvalues")
    ens = ctx.operator(0.3)
    counts = ens.counts
    expected = (WINDOW[1] - WINDOW[0]) / math.pi
    res.add("mean_count", counts.mean(), f"{expected:g} +-10%", _within(counts.mean(), expected, 0.10))
    disp = stats.dispersion_index(counts)
    res.add("dispersion", disp, "[0.8, 1.2]", 0.8 <= disp <= 1.2)
    ks = gap_test(ens)
    res.add("gap_ks_p", ks.p_value, f"> {SIGNIFICANCE}", ks.passed)
    res.details = {"runs": counts.size, "failures": len(ens.failures), "gaps": ks.n}
    return res


def criterion_2(ctx: Context) -> CriterionResult:
    res = CriterionResult(2, "boundary phase uniform on [0, pi)")
    rep = stats.uniformity_test(ctx.operator(0.3).phis, SIGNIFICANCE)
    res.add("ks_p", rep.p_value, f"> {SIGNIFICANCE}", rep.passed)
    res.details = {"resultant_length": rep.extra["resultant_length"]}
    return res


def criterion_3(ctx: Context) -> CriterionResult:
    res = CriterionResult(3, "mean relative phase equals lambda")
    big = ctx.operator(0.3).big_theta
    for j, lam in enumerate(THETA_LAMBDAS):
        m = big[:, j].mean()
        res.add(f"mean_Theta({lam / math.pi:g}pi)/lambda", m / lam, "1 +-10%", _within(m, lam, 0.10))
    return res


def criterion_4(ctx: Context) -> CriterionResult:
    res = CriterionResult(4, "two-parameter jump field is Poisson with intensity 1/pi")
    ens = experiments.jumpfield_ensemble(
        default_potential(ALPHA), E0, L_OPERATOR, JUMPFIELD_LAMBDAS, JUMPFIELD_TIMES,
        ctx.runs(RUNS_JUMPFIELD), ctx.master, threads=ctx.threads,
    )
    c = ens.counts.reshape(ens.counts.shape[0], -1).astype(float)
    target = (ens.areas / math.pi).ravel()
    means = c.mean(axis=0)
    rel = np.abs(means - target) / target
    res.add("max_rel_mean_error", rel.max(), "< 0.15", np.all(rel <= 0.15))
    pooled = c.var(axis=0, ddof=1).sum() / means.sum()
    res.add("pooled_dispersion", pooled, "[0.8, 1.2]", 0.8 <= pooled <= 1.2)
    corr = max(abs(np.corrcoef(c[:, i], c[:, j])[0, 1])
               for i, j in itertools.combinations(range(c.shape[1]), 2)
               if c[:, i].std() > 0 and c[:, j].std() > 0)
    res.add("max_abs_corr", corr, "< 0.15", corr < 0.15)
    res.details = {"rectangle_means": means.tolist(), "target": target.tolist()}
    return res


def reduced_jump_times(master, runs, lam=math.pi, alpha=ALPHA, n=N_REDUCED):
    gamma = limit_sde.gamma_of(alpha)
    out = []
    for i in range(runs):
        run = limit_sde.simulate_relative_phase_family([lam], alpha, n, 1.0, (master, i))
        out.append(run.jumps[0] ** (1.0 / gamma))
    return out


def criterion_5(ctx: Context) -> CriterionResult:
    res = CriterionResult(5, "jump times of the reduced phase have intensity (lam/pi) gamma s^(gamma-1)")
    lam = math.pi
    gamma = limit_sde.gamma_of(ALPHA)
    s_jumps = reduced_jump_times(ctx.master, ctx.runs(RUNS_REDUCED), lam)
    est = stats.empirical_intensity(s_jumps, np.linspace(0, 1, INTENSITY_BINS + 1),
                                    lambda s: lam / math.pi * gamma * s ** (gamma - 1))
    inside = est.within(2.0)
    for k in range(INTENSITY_BINS):
        res.add(f"bin{k}_z", est.z_scores[k], "|z| <= 2", inside[k])
    res.details = {"rate": est.rate.tolist(), "target": est.target.tolist(), "stderr": est.stderr.tolist()}
    return res


def criterion_6(ctx: Context) -> CriterionResult:
    res = CriterionResult(6, "explosion times: mean and Laplace transform of the exponential limit")
    lam = math.pi
    cfg = limit_sde.SdeConfig(C_EXPLOSION, lam, limit_sde.gamma_of(ALPHA), ENVELOPE_WIDTH, ENVELOPE_WIDTH)
    times = limit_sde.first_explosion_times(cfg, limit_sde.PathKind.STATIONARY_PLUS,
                                            ctx.runs(RUNS_EXPLOSION), ctx.master)
    rec = explosion.ExplosionRecord(cfg.to_table(), times[np.isfinite(times)])
    pot = explosion.DriftPotential(C_EXPLOSION, lam, ENVELOPE_WIDTH, ENVELOPE_WIDTH)
    quad = explosion.mean_explosion_quadrature(pot, -cfg.r_cap)
    z = (rec.mean - quad) / rec.standard_error
    res.add("mc_vs_quadrature_z", z, "|z| <= 3", abs(z) <= 3)
    large = explosion.mean_explosion_quadrature(
        explosion.DriftPotential(C_LARGE, lam, ENVELOPE_WIDTH, ENVELOPE_WIDTH), R_DEEP)
    res.add("quadrature_C50_over_pi/lam", large / (math.pi / lam), "1 +-5%", _within(large, math.pi / lam, 0.05))
    for xi in LAPLACE_XI:
        m, se = rec.laplace(xi, lam / math.pi)
        zx = (m - explosion.laplace_limit(xi)) / se
        res.add(f"laplace_z(xi={xi:g})", zx, "|z| <= 3", abs(zx) <= 3)
    res.details = {"mc_mean": rec.mean, "mc_se": rec.standard_error, "quadrature": quad,
                   "unexploded": int(np.sum(~np.isfinite(times)))}
    return res


def criterion_7(ctx: Context) -> CriterionResult:
    res = CriterionResult(7, "comparison sandwich S_- <= R <= S_+ on shared noise")
    cfg = limit_sde.SdeConfig(C_EXPLOSION, math.pi, limit_sde.gamma_of(ALPHA), ENVELOPE_WIDTH, ENVELOPE_WIDTH)
    worst = -math.inf
    bad_seeds = 0
    for i in range(SANDWICH_SEEDS):
        lo, mid, hi = (p.lifted for p in limit_sde.sandwich(cfg, SANDWICH_HORIZON, seed=(ctx.master, i)))
        excess = max(float(np.max(lo - mid)), float(np.max(mid - hi)))
        worst = max(worst, excess)
        bad_seeds += excess > SANDWICH_TOL
    res.add("max_order_excess", worst, f"<= {SANDWICH_TOL:g}", worst <= SANDWICH_TOL)
    res.add("violating_seeds", bad_seeds, "0", bad_seeds == 0)
    return res


def criterion_8(ctx: Context) -> CriterionResult:
    res = CriterionResult(8, "Sine_beta counts near Poisson at small beta")
    out = limit_sde.sine_beta_ensemble(BETA, [0.0, 8 * math.pi], ctx.runs(RUNS_SINE), ctx.master)
    counts = out.counts(0, 1)
    res.add("mean_count", counts.mean(), "4 +-10%", _within(counts.mean(), 4.0, 0.10))
    disp = stats.dispersion_index(counts)
    res.add("dispersion", disp, "[0.8, 1.2]", 0.8 <= disp <= 1.2)
    res.add("far_from_2piZ", out.far_fraction, "< 0.05", out.far_fraction < limit_sde.SNAP_WARN_FRACTION)
    return res


def criterion_9(ctx: Context) -> CriterionResult:
    res = CriterionResult(9, "regime contrast: alpha=0.7 gaps not exponential, alpha=0.3 gaps exponential")
    p03 = gap_test(ctx.operator(0.3)).p_value
    p07 = gap_test(ctx.operator(0.7)).p_value
    res.add("alpha0.3_gap_ks_p", p03, f"> {SIGNIFICANCE}", p03 > SIGNIFICANCE)
    res.add("alpha0.7_gap_ks_p", p07, f"<= {SIGNIFICANCE}", p07 <= SIGNIFICANCE)
    return res


def criterion_10(ctx: Context) -> CriterionResult:
    res = CriterionResult(10, "exact identities")
    spec = default_potential(ALPHA)
    consts = compute_constants(spec, E0)
    from_gradient = 2.0 * GENERATOR_SCALE * consts.c_e0
    rel = abs(consts.psi_mean - from_gradient) / abs(from_gradient)
    res.add("psi_identity_rel_err", rel, "<= 1e-12", rel <= 1e-12)

    L = 100.0
    free = solve_window(zero_path(L, 1e-3), spec, L, 1.0, WINDOW)
    j = np.arange(math.ceil(L / math.pi), math.floor((L + WINDOW[1]) / math.pi) + 1)
    fence = j * math.pi - L
    fence = fence[(fence >= WINDOW[0]) & (fence <= WINDOW[1])]
    err = np.max(np.abs(free.atoms - fence)) if free.atoms.size == fence.size else math.inf
    res.add("picket_fence_max_err", err, "<= 1e-8", err <= 1e-8)

    worst = 0.0
    for r in np.linspace(-8, 2, 11):
        quad, _ = integrate.quad(lambda x: 2.0 / (math.exp(x) + math.exp(-x)) if abs(x) < 700 else 0.0,
                                r, math.inf, epsabs=1e-14, epsrel=1e-13)
        worst = max(worst, abs(explosion.limit_mean(1.0, r) - quad))
    res.add("limit_mean_vs_sech", worst, "<= 1e-8", worst <= 1e-8)

    diffs = []
    for i in range(FD_SEEDS):
        path = sample_path(spec, FD_L, 1e-5 * FD_L, (ctx.master, i))
        diffs.append(abs(count_below(path, spec, FD_L, 1.0) - fd_count_below(path, spec, FD_L, 1.0)))
    res.add("fd_max_count_diff", max(diffs), "<= 1", max(diffs) <= 1)
    return res


def trend_measures(master, runs, ns=TREND_NS, alpha=ALPHA, lams=(math.pi, 2 * math.pi)):
    gamma = limit_sde.gamma_of(alpha)
    above, order = [], []
    for n in ns:
        thr = 2.0 * math.atan(n ** (-1.0 / (4.0 * gamma)))
        first, second = [], []
        for i in range(runs):
            run = limit_sde.simulate_relative_phase_family(list(lams), alpha, n, 1.0, (master, i),
                                                           record_every=10)
            first.append(run.paths[0])
            second.append(run.paths[1])
        above.append(stats.time_above_threshold(first, thr))
        order.append(stats.order_violation_measure(first, second))
    return above, order


def criterion_11(ctx: Context) -> CriterionResult:
    res = CriterionResult(11, "diagnostic time fractions decrease with n")
    above, order = trend_measures(ctx.master, ctx.runs(RUNS_TREND))
    for name, seq in (("time_above", above), ("order_violation", order)):
        dec = all(b < a for a, b in zip(seq, seq[1:]))
        res.add(f"{name}_decreasing", float(dec), "1", dec)
    res.details = {"n": list(TREND_NS), "time_above": above, "order_violation": order}
    return res


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11,
}


def run_criteria(numbers=None, ctx: Context | None = None) -> list[CriterionResult]:
    ctx = ctx or Context()
    numbers = sorted(CRITERIA) if numbers is None else list(numbers)
    return [CRITERIA[k](ctx) for k in numbers]
