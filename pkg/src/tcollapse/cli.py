"""
Command line entry point::

    tcollapse run|verify|compare|convergence --config <path|preset> [--out <dir>]
              [--seed <int>] [--plot-data]

Exit status: 0 success, 1 a check failed, 2 configuration error,
3 runtime error. Every command writes its CSV tables, figures and a
``manifest.json`` listing each output with its sha256.
"""

from __future__ import annotations

import argparse
import sys
import time
import traceback
from dataclasses import replace
from pathlib import Path

from tcollapse import experiments as ex
from tcollapse.config import load_config, preset_names, resolve_config_path
from tcollapse.errors import ConfigurationError, TCError, UnsupportedFluxError
from tcollapse.io import OutputDir
from tcollapse import plotting

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

COMMANDS = ("run", "verify", "compare", "convergence")


def _time_label(t: float) -> str:
    return f"{t:.6g}".replace("-", "m")


def _write_snapshots(out: OutputDir, prefix: str, snaps) -> None:
    for t, sol in snaps:
        out.write_table(f"{prefix}_t{_time_label(t)}", ("x", "u"),
                        zip(sol.grid.centers(), sol.u))


def cmd_run(cfg, out: OutputDir) -> tuple:
    model = ex.build_model(cfg)
    series = ex.simulate(cfg, model)
    snaps = ex.snapshots(cfg, series)
    _write_snapshots(out, "u", snaps)
    companion = None
    if cfg.companion and cfg.problem == "ibvp":
        companion = ex.snapshots(cfg, ex.companion_cauchy(cfg, model))
        _write_snapshots(out, "cauchy_u", companion)
    if series.boundary is not None:
        out.write_table("boundary", ("t", "u_left", "u_right"),
                        ((t, l, r) for t, (l, r) in zip(series.times[:-1], series.boundary)))
    lo, hi = ex.data_range(cfg, series)
    last = series.states[-1] - series.states[-2]
    dx = series.grid.dx[0]
    summary = [("t_final", series.t_final), ("steps", cfg.n), ("mass_initial", series.solution(0).mass()),
               ("mass_final", series.solution(-1).mass()), ("u_min", float(series.states.min())),
               ("u_max", float(series.states.max())), ("data_min", lo), ("data_max", hi),
               ("last_step_l1_change_rate", float(abs(last).sum() * dx / series.meta["dt"]))]
    out.write_table("summary", ("quantity", "value"), summary)
    if cfg.plot:
        plotting.plot_snapshots(out.path(f"{cfg.name}.png"), snaps, cfg.name, companion)
        out.register(f"{cfg.name}.png")
    print(f"{cfg.name}: {cfg.problem} run to t={cfg.t_final:g} on N={cfg.N}, M={cfg.M}, n={cfg.n}; "
          f"u in [{series.states.min():.6g}, {series.states.max():.6g}]")
    return EXIT_OK, {}


def _report_checks(out: OutputDir, cfg, checks) -> int:
    rows = []
    for c in checks:
        tol = c.tol if isinstance(c.tol, (int, float)) else str(c.tol)
        rows.append((c.name, c.value, tol, c.passed, c.detail))
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: value={c.value:.6g} tol={tol} {c.detail}".rstrip())
        for key, rep in c.reports.items():
            out.write_text(f"report_{key}.csv", rep.to_csv())
            out.write_text(f"report_{key}.txt", rep.summary())
    out.write_table("checks", ("check", "value", "tol", "passed", "detail"), rows)
    if cfg.plot and checks:
        if plotting.plot_checks(out.path("checks.png"), checks, cfg.name) is not None:
            out.register("checks.png")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK


def cmd_verify(cfg, out: OutputDir) -> tuple:
    checks = ex.run_suites(cfg)
    if not checks:
        print(f"{cfg.name}: no verification suites configured")
    status = _report_checks(out, cfg, checks)
    return status, {"checks": {c.name: bool(c.passed) for c in checks}}


def cmd_compare(cfg, out: OutputDir) -> tuple:
    res = ex.compare(cfg)
    sol = res["series"].solution(-1)
    names = list(res["solutions"])
    out.write_table("solutions", ("x", *names),
                    zip(sol.grid.centers(), *(res["solutions"][k] for k in names)))
    out.write_table("compare", ("pair", "l1", "linf"),
                    ((r["pair"], r["l1"], r["linf"]) for r in res["rows"]))
    for r in res["rows"]:
        print(f"{r['pair']}: L1 {r['l1']:.6g}, Linf {r['linf']:.6g}")
    if cfg.plot:
        plotting.plot_compare(out.path("compare.png"), sol.grid.centers(), res["solutions"],
                              f"{cfg.name} at t = {cfg.t_final:g}")
        out.register("compare.png")
    status = _report_checks(out, cfg, res["checks"]) if res["checks"] else EXIT_OK
    return status, {}


def cmd_convergence(cfg, out: OutputDir) -> tuple:
    res = ex.convergence(cfg)
    cols = ("N", "M", "n", "dx", "dlam", "dt", "l1_error", "ratio")
    out.write_table("convergence", cols, ([r[c] for c in cols] for r in res["rows"]))
    for r in res["rows"]:
        print(f"N={r['N']} M={r['M']} n={r['n']}: L1 {r['l1_error']:.6g} ratio {r['ratio']:.4g}")
    if cfg.plot:
        plotting.plot_convergence(out.path("convergence.png"), res["rows"], cfg.name)
        out.register("convergence.png")
    status = _report_checks(out, cfg, res["checks"]) if res["checks"] else EXIT_OK
    return status, {}


HANDLERS = {"run": cmd_run, "verify": cmd_verify, "compare": cmd_compare,
            "convergence": cmd_convergence}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tcollapse",
        description="Transport-collapse solver: runs, verification, comparisons and convergence.",
        epilog=f"shipped presets: {', '.join(preset_names())}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="config file, or the name of a shipped preset")
    p.add_argument("--out", help="output directory (default out/<name>-<command>)")
    p.add_argument("--seed", type=int, help="seed for randomised suites (overrides the config)")
    p.add_argument("--plot-data", action="store_true",
                   help="also write whitespace-separated .dat files for gnuplot")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which is also our configuration status
        return int(exc.code) if exc.code is not None else EXIT_OK
    start = time.perf_counter()
    try:
        path = resolve_config_path(args.config)
        cfg = load_config(path)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        out = OutputDir(args.out or Path("out") / f"{cfg.name}-{args.command}", args.plot_data)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    extra = {}
    try:
        status, extra = HANDLERS[args.command](cfg, out)
    except (ConfigurationError, UnsupportedFluxError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        status = EXIT_CONFIG
    except (TCError, ArithmeticError, ValueError, RuntimeError) as exc:
        print(f"runtime error during {args.command} of {cfg.name}: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        traceback.print_exc(limit=3, file=sys.stderr)
        status = EXIT_RUNTIME
    wall = time.perf_counter() - start
    out.manifest(args.command, path, cfg.raw, cfg.seed, wall, status, extra)
    return status


if __name__ == "__main__":
    sys.exit(main())
