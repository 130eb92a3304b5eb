"""``prufer-lab <mode> --config FILE [--seed N] [--runs M] [--threads K] [--out DIR]``.

Exit codes: 0 success, 1 numerical or acceptance failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np
import tomli

from prufer_lab import __version__, acceptance, experiments, explosion, limit_sde, stats
from prufer_lab.errors import ConfigError, ParameterError, PruferLabError
from prufer_lab.prufer import default_dt, phase_trajectories
from prufer_lab.torus import PotentialSpec, sample_path

MODES = ("spectrum", "jumpfield", "limit-sde", "sine-beta", "explosion", "phase", "report")
MODE_TABLES = {
    "spectrum": ("potential", "spectrum"),
    "jumpfield": ("potential", "jumpfield"),
    "limit-sde": ("sde",),
    "sine-beta": ("sine_beta",),
    "explosion": ("explosion",),
    "phase": ("potential", "phase"),
    "report": (),
}
MAX_SKIP_RATE = 0.01
PRESETS = "presets"


def load_config(path: str) -> dict:
    """Parse a TOML config; bare names fall back to the bundled presets."""
    p = Path(path)
    if p.is_file():
        text = p.read_text()
    else:
        res = resources.files("prufer_lab").joinpath(PRESETS, p.name)
        if not res.is_file():
            raise ConfigError(f"config file not found: {path}")
        text = res.read_text()
    try:
        return tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc


def resolve(cfg: dict, mode: str, seed: int | None, runs: int | None) -> dict:
    cfg = json.loads(json.dumps(cfg))
    missing = [t for t in MODE_TABLES[mode] if t not in cfg]
    if missing:
        raise ConfigError(f"mode {mode!r} needs table(s) {', '.join('[' + m + ']' for m in missing)}")
    run = cfg.setdefault("run", {})
    if seed is not None:
        run["seed"] = seed
    if runs is not None:
        run["runs"] = runs
    run.setdefault("seed", 0)
    run.setdefault("runs", 1)
    if int(run["runs"]) < 1:
        raise ConfigError("runs must be >= 1")
    run.pop("threads", None)  # results do not depend on the worker count
    cfg["mode"] = mode
    return cfg


def _pi_list(table, key):
    """Values given either as ``key`` or in units of pi as ``key_pi``."""
    if key + "_pi" in table:
        return [float(v) * math.pi for v in table[key + "_pi"]]
    if key in table:
        return [float(v) for v in table[key]]
    raise ConfigError(f"missing {key!r} (or {key + '_pi'!r})")


def _pi_scalar(table, key, default=None):
    if key + "_pi" in table:
        return float(table[key + "_pi"]) * math.pi
    if key in table:
        return float(table[key])
    if default is None:
        raise ConfigError(f"missing {key!r} (or {key + '_pi'!r})")
    return default


def _config_line(cfg) -> str:
    return "# config: " + json.dumps(cfg, sort_keys=True)


def _write_csv(path: Path, cfg, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(_config_line(cfg) + "\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _write_summary(out: Path, cfg, body: dict, name="summary.json"):
    doc = {"config": cfg, "version": __version__,
           "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(), **body}
    (out / name).write_text(json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n")


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x) if math.isfinite(x) else None
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    return x


def _skip_status(failures, total) -> int:
    return 1 if total and len(failures) / total > MAX_SKIP_RATE else 0


# ------------------------------------------------------------------- modes

def run_spectrum(cfg, out: Path, threads) -> int:
    spec = PotentialSpec.from_table(cfg["potential"])
    t = cfg["spectrum"]
    e0, L = float(t.get("e0", 1.0)), float(t["L"])
    window = _pi_list(t, "window")
    run = cfg["run"]
    ens = experiments.operator_ensemble(spec, e0, L, window, int(run["runs"]), int(run["seed"]),
                                        dt=t.get("dt"), threads=threads)
    rows = [(r.index, j, float(a)) for r in ens.realizations for j, a in enumerate(r.atoms)]
    _write_csv(out / "atoms.csv", cfg, ["seed", "atom_index", "atom_value"], rows)
    counts = ens.counts
    edges = np.arange(window[0], window[1] + math.pi * (1 - 1e-12), math.pi)
    if edges[-1] < window[1]:
        edges = np.append(edges, window[1])
    cells = [int(sum(np.sum((r.atoms >= lo) & (r.atoms < hi)) for r in ens.realizations))
             for lo, hi in zip(edges[:-1], edges[1:])]
    body = {
        "runs": len(ens.realizations),
        "failures": [f.__dict__ for f in ens.failures],
        "mean_count": float(counts.mean()) if counts.size else None,
        "dispersion": stats.dispersion_index(counts) if counts.size > 1 else None,
        "cell_edges": edges, "cell_counts": cells,
    }
    gaps = ens.gaps
    if gaps.size:
        body["gap_test"] = stats.ks_exponential(gaps, 1.0 / math.pi).to_json()
    if ens.realizations:
        body["phase_test"] = stats.uniformity_test(ens.phis).to_json()
    _write_summary(out, cfg, body)
    return _skip_status(ens.failures, int(run["runs"]))


def run_jumpfield(cfg, out: Path, threads) -> int:
    spec = PotentialSpec.from_table(cfg["potential"])
    t = cfg["jumpfield"]
    run = cfg["run"]
    ens = experiments.jumpfield_ensemble(
        spec, float(t.get("e0", 1.0)), float(t["n"]), _pi_list(t, "lambda_grid"),
        [float(v) for v in t.get("t_grid", [0.0, 0.25, 0.5, 0.75, 1.0])],
        int(run["runs"]), int(run["seed"]), dt=t.get("dt"), threads=threads,
    )
    tg, lg = ens.t_grid, ens.lambda_grid
    rows = [(m, float(tg[i]), float(tg[i + 1]), float(lg[j]), float(lg[j + 1]), int(c[i, j]))
            for m, c in enumerate(ens.counts) for i in range(tg.size - 1) for j in range(lg.size - 1)]
    _write_csv(out / "rectangles.csv", cfg, ["run", "t_lo", "t_hi", "lambda_lo", "lambda_hi", "count"], rows)
    body = {"runs": int(ens.counts.shape[0]), "failures": [f.__dict__ for f in ens.failures],
            "mean_counts": ens.counts.mean(axis=0) if ens.counts.size else [],
            "target": ens.areas / math.pi}
    _write_summary(out, cfg, body)
    return _skip_status(ens.failures, int(run["runs"]))


def _sde_config(t, seed) -> limit_sde.SdeConfig:
    t = dict(t)
    if "gamma" not in t:
        t["gamma"] = limit_sde.gamma_of(float(t.get("alpha", 0.3)))
    t["lambda"] = _pi_scalar(t, "lambda", math.pi)
    t.setdefault("seed", seed)
    return limit_sde.SdeConfig.from_table(t)


def run_limit_sde(cfg, out: Path, threads) -> int:
    t = cfg["sde"]
    run = cfg["run"]
    sc = _sde_config(t, int(run["seed"]))
    kind = limit_sde.PathKind(t.get("kind", "riccati"))
    horizon = float(t.get("horizon", 1.0))
    power = t.get("time_power", "uniform")
    x0 = t.get("x0")
    rows, firsts = [], []
    for m in range(int(run["runs"])):
        seed = (int(run["seed"]), m)
        if kind is limit_sde.PathKind.RELATIVE_PHASE:
            p = limit_sde.simulate_relative_phase(sc, float(t.get("alpha", 0.3)), float(t.get("n", 1e4)),
                                                  horizon, seed, record_every=int(t.get("record_every", 10)))
        else:
            p = limit_sde.simulate_coupled(sc, [kind], horizon, seed, x0, power,
                                           record_every=int(t.get("record_every", 100)))[0]
        rows += [(m, k, float(v)) for k, v in enumerate(p.explosions)]
        firsts.append(float(p.explosions[0]) if p.explosions.size else math.inf)
        if m == 0:
            p.to_csv(out / "path_0.csv")
    _write_csv(out / "explosions.csv", cfg, ["run", "explosion_index", "time"], rows)
    f = np.array(firsts)
    fin = f[np.isfinite(f)]
    body = {"runs": len(firsts), "kind": kind.value, "sde": sc.to_table(),
            "exploded": int(fin.size), "mean_first_time": float(fin.mean()) if fin.size else None,
            "explosions_per_run": len(rows) / len(firsts)}
    _write_summary(out, cfg, body)
    return 0


def run_sine_beta(cfg, out: Path, threads) -> int:
    t = cfg["sine_beta"]
    run = cfg["run"]
    lams = _pi_list(t, "lambdas")
    res = limit_sde.sine_beta_ensemble(float(t["beta"]), lams, int(run["runs"]), int(run["seed"]),
                                       t.get("horizon"), float(t.get("dt", 0.01)),
                                       float(t.get("complex_bm_variance", limit_sde.COMPLEX_BM_VARIANCE)))
    counts = res.counts(0, -1)
    _write_csv(out / "counts.csv", cfg, ["run", "count"], list(enumerate(counts.tolist())))
    body = {"runs": int(counts.size), "mean_count": float(counts.mean()),
            "dispersion": stats.dispersion_index(counts), "far_fraction": res.far_fraction,
            "warning": res.warning}
    _write_summary(out, cfg, body)
    return 0


def run_explosion(cfg, out: Path, threads) -> int:
    t = cfg["explosion"]
    cs = [float(v) for v in t.get("c_n", [20.0])]
    lams = _pi_list(t, "lambda") if ("lambda" in t or "lambda_pi" in t) else [math.pi]
    rs = [float(v) for v in t.get("r", [-8.0, -4.0, 0.0, 2.0])]
    rows = explosion.sweep(cs, lams, rs, float(t.get("delta", 0.0)), float(t.get("epsilon", 0.0)))
    _write_csv(out / "sweep.csv", cfg, ["C_n", "lambda", "r", "mean_time", "limit_value"], rows)
    body = {"rows": len(rows)}
    mc = int(cfg["run"]["runs"]) if t.get("monte_carlo", False) else 0
    if mc:
        sc = limit_sde.SdeConfig(cs[0], lams[0], limit_sde.gamma_of(float(t.get("alpha", 0.3))),
                                 float(t.get("delta", 0.0)), float(t.get("epsilon", 0.0)))
        times = limit_sde.first_explosion_times(sc, t.get("kind", "stationary_plus"), mc, int(cfg["run"]["seed"]))
        rec = explosion.ExplosionRecord(sc.to_table(), times[np.isfinite(times)])
        body["monte_carlo"] = {"runs": mc, "mean": rec.mean, "stderr": rec.standard_error,
                               "laplace": {str(xi): rec.laplace(xi, lams[0] / math.pi) for xi in (0.5, 1.0, 2.0)}}
        _write_csv(out / "explosions.csv", cfg, ["run", "explosion_index", "time"],
                   [(m, 0, float(v)) for m, v in enumerate(times)])
    _write_summary(out, cfg, body)
    return 0


def run_phase(cfg, out: Path, threads) -> int:
    spec = PotentialSpec.from_table(cfg["potential"])
    t = cfg["phase"]
    run = cfg["run"]
    e0, L = float(t.get("e0", 1.0)), float(t["L"])
    lams = _pi_list(t, "lambdas")
    k0 = math.sqrt(e0)
    every = int(t.get("record_every", 1000))
    dt = float(t.get("dt", default_dt(L, k0)))
    rows = []
    for m in range(int(run["runs"])):
        path = sample_path(spec, L, dt, (int(run["seed"]), m))
        th = phase_trajectories(path, spec, [k0, *(k0 + lam / L for lam in lams)])
        rel = th[1:] - th[0]
        rows += [(m, lam, float(rel[j, -1]), float(th[0, -1] % math.pi)) for j, lam in enumerate(lams)]
        if m == 0:
            times = path.times[::every]
            np.savetxt(out / "phase_0.csv", np.column_stack([times, th[0, ::every], *rel[:, ::every]]),
                       delimiter=",", comments="", header=_config_line(cfg) + "\n" +
                       ",".join(["t", "theta0", *[f"Theta_{j}" for j in range(len(lams))]]))
    _write_csv(out / "phases.csv", cfg, ["run", "lambda", "Theta_L", "phi"], rows)
    term = np.array([r[2] for r in rows]).reshape(-1, len(lams))
    body = {"runs": int(run["runs"]), "lambdas": lams, "mean_Theta_L": term.mean(axis=0)}
    _write_summary(out, cfg, body)
    return 0


def run_report(cfg, out: Path, threads) -> int:
    t = cfg.get("report", {})
    numbers = [int(k) for k in t.get("criteria", sorted(acceptance.CRITERIA))]
    ctx = acceptance.Context(int(cfg["run"]["seed"]), threads, float(t.get("scale", 1.0)))
    results = []
    for k in numbers:
        r = acceptance.CRITERIA[k](ctx)
        print(r.line(), flush=True)
        results.append(r)
    (out / "report.txt").write_text("\n".join(r.line() for r in results) + "\n")
    _write_summary(out, cfg, {"criteria": [r.to_json() for r in results],
                              "all_pass": all(r.passed for r in results)}, "report.json")
    return 0 if all(r.passed for r in results) else 1


RUNNERS = {
    "spectrum": run_spectrum, "jumpfield": run_jumpfield, "limit-sde": run_limit_sde,
    "sine-beta": run_sine_beta, "explosion": run_explosion, "phase": run_phase, "report": run_report,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prufer-lab", description="Monte Carlo experiments on Prufer phases and their limit diffusions.")
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", required=True, help="TOML file or bundled preset name")
    p.add_argument("--seed", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--threads", type=int, help=f"worker processes (default ${experiments.THREADS_ENV}, then CPU count)")
    p.add_argument("--out", default="prufer-lab-out")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, None) else 2
    try:
        raw = load_config(args.config)
        threads = args.threads if args.threads is not None else raw.get("run", {}).get("threads")
        cfg = resolve(raw, args.mode, args.seed, args.runs)
    except ConfigError as exc:
        print(f"prufer-lab: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    threads = experiments.resolve_threads(threads)
    try:
        return RUNNERS[args.mode](cfg, out, threads)
    except (ConfigError, ParameterError, KeyError, TypeError) as exc:
        print(f"prufer-lab: config error: {exc}", file=sys.stderr)
        return 2
    except PruferLabError as exc:
        print(f"prufer-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
