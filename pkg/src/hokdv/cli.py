"""Command-line front end: every experiment in the repository is runnable
as one subcommand driven by a flat config file plus overrides.

Exit codes follow a machine-parseable contract:
    0  run completed and every scientific verdict passed
    1  run completed but a scientific verdict failed (growth law violated,
       audit violation, oracle disagreement, divergent contraction, blow-up)
    2  usage or configuration error

Each run writes into its own directory runs/<timestamp>-<confighash>/
containing exactly one manifest.json (command, full configuration, seed,
version, output paths, verdicts) next to the data files.  Given the same
configuration and seed, the data files are byte-identical across runs.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, Field, load_config, parse_config_text, validate_config
from .dispersion import DispersionModel, audit_resonance_bound
from .iterates import (
    grid_size_for_mode,
    growth_sweep,
    phi_n_data,
    second_iterate_closed,
    second_iterate_quadrature,
)
from .reporting import (
    atomic_write_text,
    dump_json,
    rows_to_csv,
    write_report_csv,
    write_report_json,
)
from .solver import (
    BlowUpError,
    SolverConfig,
    conserved_quantities,
    contraction_experiment,
    integrate,
)
from .torus import SpectralField, TorusGrid
from .norms import write_frames
from .verifier import (
    RatioSearchConfig,
    bilinear_zs_ratio,
    dyadic_bilinear_ratio,
    embedding_ratio,
    product_l2_ratio,
)

PASS, SCI_FAIL, USAGE = 0, 1, 2

ESTIMATE_SEARCHES = {
    "2.1": "dyadic-bilinear",
    "2.2": "product-l2",
    "2.5": "embedding",
    "3.1": "bilinear-zs",
}


@dataclass
class RunContext:
    command: str
    config: dict
    out_dir: Path
    started: float
    outputs: list[str]
    verdicts: dict

    def record(self, name: str) -> Path:
        self.outputs.append(name)
        return self.out_dir / name

    def finish(self) -> None:
        manifest = {
            "command": self.command,
            "config": self.config,
            "seed": self.config.get("seed"),
            "version": __version__,
            "started_unix": self.started,
            "finished_unix": time.time(),
            "outputs": sorted(self.outputs),
            "verdicts": self.verdicts,
        }
        atomic_write_text(self.out_dir / "manifest.json", dump_json(manifest))


def _parallel_map(func, items, jobs: int) -> list:
    """Order-preserving map; results are identical for any worker count."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(func, items))


def _make_run_dir(out_root: Path, command: str, config: dict) -> Path:
    digest = hashlib.sha256(
        (command + repr(sorted(config.items()))).encode()
    ).hexdigest()[:8]
    stamp = time.strftime("%Y%m%dT%H%M%S", time.gmtime())
    path = out_root / f"{stamp}-{digest}"
    suffix = 0
    while path.exists():
        suffix += 1
        path = out_root / f"{stamp}-{digest}-{suffix}"
    path.mkdir(parents=True)
    return path


def _begin(args, command: str, schema: dict[str, Field]) -> RunContext:
    raw: dict = {}
    if args.config:
        raw.update(load_config(args.config))
    for override in args.set or []:
        raw.update(parse_config_text(override))
    config = validate_config(raw, schema)
    env_seed = os.environ.get("HOKDV_SEED")
    if env_seed is not None and "seed" in config:
        config["seed"] = int(env_seed)
    out_dir = _make_run_dir(Path(args.out_root), command, config)
    return RunContext(command, config, out_dir, time.time(), [], {})


def _initial_data(config: dict, grid: TorusGrid, rng: np.random.Generator) -> SpectralField:
    family = config["initial"]
    if family == "phi_n":
        return phi_n_data(config["initial_N"], config["initial_s"], grid)
    if family == "cosine":
        a = config["initial_amplitude"] * np.pi
        return SpectralField.from_modes(grid, {1: a, -1: a})
    if family == "smooth-random":
        amps = {}
        for m in range(1, config["initial_modes"] + 1):
            a = (
                config["initial_amplitude"]
                * (rng.normal() + 1j * rng.normal())
                * np.exp(-config["initial_decay"] * m)
            )
            amps[m] = a
            amps[-m] = np.conj(a)
        return SpectralField.from_modes(grid, amps)
    raise ConfigError("initial", f"unknown data family {family!r}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

SIMULATE_SCHEMA = {
    "j": Field("int", required=True, check=lambda v: v >= 1),
    "lam": Field("float", 1.0, check=lambda v: v >= 1),
    "M": Field("int", required=True, check=lambda v: v >= 8 and v % 2 == 0),
    "dt": Field("float", required=True, check=lambda v: v > 0),
    "T": Field("float", required=True, check=lambda v: v > 0),
    "scheme": Field("str", "ifrk4", check=lambda v: v in ("ifrk4", "etdrk4")),
    "dealias": Field("bool", True),
    "nonlinear": Field("bool", True),
    "frame_stride": Field("int", 10, check=lambda v: v >= 1),
    "initial": Field("str", "smooth-random"),
    "initial_N": Field("int", 4, check=lambda v: v >= 1),
    "initial_s": Field("float", 0.0),
    "initial_amplitude": Field("float", 0.05, check=lambda v: v > 0),
    "initial_modes": Field("int", 6, check=lambda v: v >= 1),
    "initial_decay": Field("float", 1.5),
    "seed": Field("int", 2025),
}


def cmd_simulate(args) -> int:
    ctx = _begin(args, "simulate", SIMULATE_SCHEMA)
    cfg = ctx.config
    model = DispersionModel(cfg["j"], cfg["lam"])
    grid = TorusGrid(cfg["lam"], cfg["M"])
    rng = np.random.default_rng(cfg["seed"])
    u0 = _initial_data(cfg, grid, rng)
    solver_cfg = SolverConfig(
        dt=cfg["dt"],
        T=cfg["T"],
        dealias=cfg["dealias"],
        scheme=cfg["scheme"],
        nonlinear=cfg["nonlinear"],
        frame_stride=cfg["frame_stride"],
    )
    try:
        times, frames = integrate(model, u0, solver_cfg)
    except BlowUpError as err:
        ctx.verdicts["blow_up"] = {"t": err.t, "ratio": err.ratio}
        ctx.finish()
        print(f"error: {err}", file=sys.stderr)
        return SCI_FAIL
    mean0, l20 = conserved_quantities(frames[0])
    rows = []
    for t, frame in zip(times, frames):
        mean, l2 = conserved_quantities(frame)
        rows.append(
            {
                "t": float(t),
                "mean": mean,
                "l2": l2,
                "mean_drift": abs(mean - mean0),
                "l2_drift": abs(l2 - l20) / max(l20, 1e-300),
            }
        )
    atomic_write_text(
        ctx.record("conservation.csv"),
        rows_to_csv(rows, ["t", "mean", "l2", "mean_drift", "l2_drift"]),
    )
    write_frames(ctx.record("frames.bin"), frames, model, cfg["dt"] * cfg["frame_stride"])
    worst = max(r["l2_drift"] for r in rows)
    ctx.verdicts["max_l2_drift"] = worst
    ctx.verdicts["max_mean_drift"] = max(r["mean_drift"] for r in rows)
    ctx.finish()
    print(f"run directory: {ctx.out_dir}")
    return PASS


ILLPOSED_SCHEMA = {
    "j": Field("int", required=True, check=lambda v: v >= 1),
    "lam": Field("float", 1.0, check=lambda v: v >= 1),
    "s_list": Field("float_list", required=True, check=lambda v: len(v) >= 1),
    "N_list": Field("int_list", required=True, check=lambda v: len(v) >= 3),
    "t": Field("float", 1.0, check=lambda v: v > 0),
    "seed": Field("int", 2025),
}


def _sweep_one(task):
    j, lam, s, n_list, t = task
    return growth_sweep(DispersionModel(j, lam), s, n_list, t)


def cmd_illposed_sweep(args) -> int:
    ctx = _begin(args, "illposed-sweep", ILLPOSED_SCHEMA)
    cfg = ctx.config
    tasks = [
        (cfg["j"], cfg["lam"], s, cfg["N_list"], cfg["t"]) for s in cfg["s_list"]
    ]
    reports = _parallel_map(_sweep_one, tasks, args.jobs)
    all_rows: list[dict] = []
    table = []
    ok = True
    for s, report in zip(cfg["s_list"], reports):
        all_rows.extend(report.rows)
        summary = dict(report.summary)
        consistent = bool(report.passed) and (
            summary["grows_unbounded"] == summary["below_threshold"]
        )
        summary["consistent"] = consistent
        summary["s"] = s
        table.append(summary)
        ok = ok and consistent
    atomic_write_text(
        ctx.record("growth.csv"),
        rows_to_csv(all_rows, ["j", "s", "N", "t", "h_s_norm", "resonant_terms"]),
    )
    atomic_write_text(
        ctx.record("verdicts.json"),
        dump_json({"j": cfg["j"], "t": cfg["t"], "per_s": table, "passed": ok}),
    )
    ctx.verdicts["passed"] = ok
    ctx.finish()
    for entry in table:
        print(
            f"s={entry['s']}: fitted={entry['fitted_exponent']:.4f} "
            f"theory={entry['theory_exponent']:.4f} consistent={entry['consistent']}"
        )
    print(f"run directory: {ctx.out_dir}")
    return PASS if ok else SCI_FAIL


AUDIT_SCHEMA = {
    "j_list": Field("int_list", required=True, check=lambda v: len(v) >= 1),
    "kmax": Field("int", required=True, check=lambda v: v >= 1),
    "lam": Field("float", 1.0, check=lambda v: v >= 1),
    "seed": Field("int", 2025),
}


def _audit_one(task):
    j, lam, kmax = task
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = DispersionModel(j, lam)
    return audit_resonance_bound(model, kmax)


def cmd_resonance_audit(args) -> int:
    ctx = _begin(args, "resonance-audit", AUDIT_SCHEMA)
    cfg = ctx.config
    tasks = [(j, cfg["lam"], cfg["kmax"]) for j in cfg["j_list"]]
    reports = _parallel_map(_audit_one, tasks, args.jobs)
    rows = []
    violations = 0
    for report in reports:
        rows.extend(report.rows)
        violations += report.summary["violations"]
    atomic_write_text(
        ctx.record("audit.csv"),
        rows_to_csv(rows, ["j", "kmax", "pairs_checked", "violations", "min_ratio"]),
    )
    ctx.verdicts["violations"] = violations
    ctx.finish()
    for row in rows:
        print(
            f"j={row['j']}: pairs={row['pairs_checked']} violations={row['violations']} "
            f"min_ratio={row['min_ratio']:.8f}"
        )
    print(f"run directory: {ctx.out_dir}")
    return PASS if violations == 0 else SCI_FAIL


ESTIMATE_SCHEMA = {
    "estimate": Field("str", required=True, check=lambda v: v in ESTIMATE_SEARCHES),
    "j": Field("int", 2, check=lambda v: v >= 1),
    "lam": Field("float", 1.0, check=lambda v: v >= 1),
    "s": Field("float", -1.5),
    "a": Field("float", 0.3),
    "b": Field("float", 0.3),
    "l1": Field("int", 0, check=lambda v: v >= 0),
    "l2": Field("int", 0, check=lambda v: v >= 0),
    "trials": Field("int", 200, check=lambda v: v >= 1),
    "k_max": Field("int", 32, check=lambda v: v >= 2),
    "t_modes": Field("int", 64, check=lambda v: v >= 4),
    "support": Field("int", 48, check=lambda v: v >= 1),
    "generator": Field("str", "mixed"),
    "seed": Field("int", 2025),
}


def cmd_estimate_search(args) -> int:
    ctx = _begin(args, "estimate-search", ESTIMATE_SCHEMA)
    cfg = ctx.config
    model = DispersionModel(cfg["j"], cfg["lam"])
    search_cfg = RatioSearchConfig(
        trials=cfg["trials"],
        k_max=cfg["k_max"],
        t_modes=cfg["t_modes"],
        support=cfg["support"],
        generator=cfg["generator"],
        seed=cfg["seed"],
    )
    estimate = cfg["estimate"]
    if estimate == "2.1":
        report = dyadic_bilinear_ratio(model, cfg["l1"], cfg["l2"], search_cfg)
    elif estimate == "2.2":
        report = product_l2_ratio(model, cfg["a"], cfg["b"], search_cfg)
    elif estimate == "2.5":
        report = embedding_ratio(model, cfg["s"], search_cfg)
    else:
        report = bilinear_zs_ratio(model, cfg["s"], search_cfg)
    exp_report = report.to_experiment_report(
        f"estimate-search-{ESTIMATE_SEARCHES[estimate]}"
    )
    write_report_csv(ctx.record("trials.csv"), exp_report)
    write_report_json(ctx.record("summary.json"), exp_report)
    ctx.verdicts["max_ratio"] = report.max_ratio
    ctx.verdicts["flags"] = report.flags
    ctx.finish()
    print(
        f"estimate {estimate} ({ESTIMATE_SEARCHES[estimate]}): max ratio "
        f"{report.max_ratio:.6g} over {cfg['trials']} trials"
        + (f"  [flags: {', '.join(report.flags)}]" if report.flags else "")
    )
    print(f"run directory: {ctx.out_dir}")
    return PASS


CONTRACTION_SCHEMA = {
    "j": Field("int", 2, check=lambda v: v >= 1),
    "lam": Field("float", 1.0, check=lambda v: v >= 1),
    "s": Field("float", -1.5),
    "amplitude": Field("float", 0.01, check=lambda v: v > 0),
    "max_iter": Field("int", 10, check=lambda v: v >= 1),
    "n_frames": Field("int", 301, check=lambda v: v >= 41),
    "modes": Field("int", 16, check=lambda v: v >= 8 and v % 2 == 0),
    "seed": Field("int", 2025),
}


def cmd_contraction(args) -> int:
    ctx = _begin(args, "contraction", CONTRACTION_SCHEMA)
    cfg = ctx.config
    model = DispersionModel(cfg["j"], cfg["lam"])
    grid = TorusGrid(cfg["lam"], cfg["modes"])
    amp = cfg["amplitude"] * np.pi
    phi = SpectralField.from_modes(grid, {1: amp, -1: amp})
    trace = contraction_experiment(
        model, phi, cfg["s"], max_iter=cfg["max_iter"], n_frames=cfg["n_frames"]
    )
    rows = [
        {
            "iteration": i + 1,
            "diff_zs": d,
            "diff_hs_sup": h,
        }
        for i, (d, h) in enumerate(zip(trace.diff_norms, trace.hs_sup_diffs))
    ]
    atomic_write_text(
        ctx.record("trace.csv"), rows_to_csv(rows, ["iteration", "diff_zs", "diff_hs_sup"])
    )
    has_verdict = len(trace.diff_norms) >= 2
    verdict = bool(has_verdict and trace.factor < 0.5)
    payload = {
        "factor": trace.factor,
        "converged": trace.converged,
        "diverged": trace.diverged,
        "verdict_contracting": verdict if has_verdict else None,
    }
    atomic_write_text(ctx.record("summary.json"), dump_json(payload))
    ctx.verdicts.update(payload)
    ctx.finish()
    print(
        f"contraction factor: {trace.factor:.6g} (converged={trace.converged}, "
        f"diverged={trace.diverged})"
    )
    print(f"run directory: {ctx.out_dir}")
    if trace.diverged:
        return SCI_FAIL
    if has_verdict and not verdict:
        return SCI_FAIL
    return PASS


PICARD_SCHEMA = {
    "j_list": Field("int_list", [2, 3], check=lambda v: len(v) >= 1),
    "N_list": Field("int_list", [2, 4, 8], check=lambda v: len(v) >= 1),
    "t_list": Field("float_list", [0.1, 0.3], check=lambda v: len(v) >= 1),
    "s": Field("float", 0.0),
    "lam": Field("float", 1.0, check=lambda v: v >= 1),
    "steps": Field("int", 256, check=lambda v: v >= 16),
    "tol": Field("float", 1e-6, check=lambda v: v > 0),
    "seed": Field("int", 2025),
}


def cmd_picard_check(args) -> int:
    ctx = _begin(args, "picard-check", PICARD_SCHEMA)
    cfg = ctx.config
    rows = []
    ok = True
    for j in cfg["j_list"]:
        model = DispersionModel(j, cfg["lam"])
        for N in cfg["N_list"]:
            grid = TorusGrid(cfg["lam"], grid_size_for_mode(3 * N))
            u0 = phi_n_data(N, cfg["s"], grid)
            for t in cfg["t_list"]:
                closed = second_iterate_closed(model, u0, t).field
                quad = second_iterate_quadrature(model, u0, t, cfg["steps"])
                err = float(np.max(np.abs(closed.coeffs - quad.coeffs)))
                passed = err <= cfg["tol"]
                ok = ok and passed
                rows.append(
                    {
                        "j": j,
                        "N": N,
                        "t": t,
                        "steps": cfg["steps"],
                        "max_abs_err": err,
                        "pass": passed,
                    }
                )
    atomic_write_text(
        ctx.record("oracle.csv"),
        rows_to_csv(rows, ["j", "N", "t", "steps", "max_abs_err", "pass"]),
    )
    ctx.verdicts["passed"] = ok
    ctx.finish()
    for row in rows:
        print(
            f"j={row['j']} N={row['N']} t={row['t']}: err={row['max_abs_err']:.3e} "
            f"{'ok' if row['pass'] else 'FAIL'}"
        )
    print(f"run directory: {ctx.out_dir}")
    return PASS if ok else SCI_FAIL



# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hokdv",
        description="Spectral numerics laboratory for the periodic higher-order "
        "KdV equation: simulation, resonance audits, iterate growth sweeps, "
        "estimate ratio searches, and contraction measurements.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "simulate": (cmd_simulate, "integrate the nonlinear equation and track invariants"),
        "illposed-sweep": (cmd_illposed_sweep, "third-iterate growth exponents across s"),
        "resonance-audit": (cmd_resonance_audit, "exact integer lower-bound audit"),
        "estimate-search": (cmd_estimate_search, "empirical ratio search for one estimate"),
        "contraction": (cmd_contraction, "cutoff Duhamel map contraction measurement"),
        "picard-check": (cmd_picard_check, "closed-form vs quadrature oracle agreement"),
    }
    for name, (func, help_text) in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=str, default=None, help="key = value config file")
        p.add_argument(
            "--set",
            action="append",
            metavar="KEY=VALUE",
            help="override one config entry (repeatable)",
        )
        p.add_argument("--out-root", type=str, default="runs", help="run directory root")
        p.add_argument("--jobs", type=int, default=1, help="worker cap (experiments are deterministic regardless)")
        p.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return USAGE
    except FileNotFoundError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
