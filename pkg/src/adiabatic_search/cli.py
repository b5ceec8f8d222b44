"""Command-line front end.

Subcommands: simulate, sweep, bounds, verify, figure1.  Options may also come
from a ``key=value`` config file (``--config``); command-line flags win.  The
effective configuration is written at the top of every output file as
``#cfg key=value`` lines.

Exit codes: 0 ok, 1 verify failure, 2 configuration error, 3 integrator
failure, 4 sweep with fewer than 90% successful cells, 5 malformed sweep CSV.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

from . import bounds as bnd
from .dynamics import DecoherenceParams, IntegratorError, integrate, success_probability, write_trajectory_csv
from .experiments import (
    DEFAULT_NS,
    DEFAULT_OMEGAS,
    SLOPE_CSV_HEADER,
    SWEEP_CSV_HEADER,
    SweepRecord,
    fit_all,
    omega_monotone_violations,
    scaling_sweep,
)
from .model import CouplingSpec, DomainError, SearchModel, k_fluctuation, zeta
from .schedule import Schedule
from .svg import render_scaling_figure

log = logging.getLogger("adiabatic_search")

EXIT_VERIFY, EXIT_CONFIG, EXIT_INTEGRATOR, EXIT_SWEEP, EXIT_CSV = 1, 2, 3, 4, 5
WORKERS_ENV = "ADIABATIC_SEARCH_WORKERS"

# options that never enter the #cfg echo
_NOT_ECHOED = {"config", "command", "verbose", "inject"}


class ConfigError(ValueError):
    pass


def read_config_file(path: str | os.PathLike) -> dict[str, str]:
    """Parse ``key=value`` lines; ``#`` starts a comment. Keys use ``_`` or ``-``."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _float_list(text: str) -> list[float]:
    return [float(t) for t in str(text).split(",") if t.strip()]


def _int_list(text: str) -> list[int]:
    return [int(float(t)) for t in str(text).split(",") if t.strip()]


def _add_physics(p: argparse.ArgumentParser) -> None:
    p.add_argument("--omega", type=float, help="interpolation angle in [0, 1]: A=cos(omega pi/2), B=sin(omega pi/2)")
    p.add_argument("--a", dest="a_weight", type=float, help="explicit Hamiltonian weight A (excludes --omega)")
    p.add_argument("--b", dest="b_weight", type=float, help="explicit dephasing weight B (excludes --omega)")
    p.add_argument("--coupling", choices=("h", "hamiltonian", "power"), default="h",
                   help="W = H (h) or Gamma = gap**sigma (power)")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-9, help="integrator local error tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adiabatic-search",
                                     description="Local adiabatic search under eigenbasis dephasing.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="key=value configuration file; flags override it")
        return p

    p = add("simulate", "integrate one run and write the trajectory CSV")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--runtime", type=float, default=0.0)
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--out", default="trajectory.csv")
    _add_physics(p)

    p = add("sweep", "run time at fixed success probability over an (omega, N) grid")
    p.add_argument("--omegas", default=",".join(f"{w:g}" for w in DEFAULT_OMEGAS))
    p.add_argument("--ns", default=",".join(str(n) for n in DEFAULT_NS))
    p.add_argument("--target", type=float, default=0.5)
    p.add_argument("--p-tol", dest="p_tol", type=float, default=1e-4)
    p.add_argument("--window", help="fit window 'N_min,N_max' (default: upper half of --ns)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="sweep.csv")
    p.add_argument("--slope-out", dest="slope_out", default="slopes.csv")
    _add_physics(p)

    p = add("bounds", "compare simulated success probabilities with the analytic bounds")
    p.add_argument("--ns", default="16,64,256")
    p.add_argument("--runtimes", default="", help="explicit run times; default is a multiple of N per N")
    p.add_argument("--runtime-factors", dest="runtime_factors", default="5,20,80",
                   help="run times as multiples of N when --runtimes is empty")
    p.add_argument("--omegas", default="0,0.5,0.9,1")
    p.add_argument("--out", default="bounds.csv")
    _add_physics(p)

    p = add("verify", "run the invariant suite and print a pass/fail table")
    p.add_argument("--only", default="", help="comma-separated subset of check names")
    p.add_argument("--inject", default=None, help=argparse.SUPPRESS)

    p = add("figure1", "render log2 T vs log2 N as SVG")
    p.add_argument("--sweep-csv", dest="sweep_csv", default="", help="existing sweep CSV (computed if omitted)")
    p.add_argument("--slope-csv", dest="slope_csv", default="")
    p.add_argument("--omegas", default=",".join(f"{w:g}" for w in DEFAULT_OMEGAS))
    p.add_argument("--ns", default=",".join(str(n) for n in DEFAULT_NS))
    p.add_argument("--target", type=float, default=0.5)
    p.add_argument("--p-tol", dest="p_tol", type=float, default=1e-4)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="figure1.svg")
    _add_physics(p)
    return parser


def parse_args(argv: list[str] | None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            cfg = read_config_file(args.config)
        except (OSError, ConfigError) as exc:
            parser.error(str(exc))
        # re-parse with config values as defaults so explicit flags still win
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in subparser._actions}
        unknown = sorted(set(cfg) - set(known))
        if unknown:
            parser.error(f"unknown config keys: {', '.join(unknown)}")
        defaults = {}
        for key, value in cfg.items():
            action = known[key]
            try:
                defaults[key] = action.type(value) if action.type else value
            except ValueError:
                parser.error(f"bad value for config key {key!r}: {value!r}")
        subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def effective_config(args: argparse.Namespace) -> list[str]:
    items = sorted((k, v) for k, v in vars(args).items() if k not in _NOT_ECHOED and v is not None)
    return [f"#cfg command={args.command}"] + [f"#cfg {k}={v}" for k, v in items]


def coupling_from_args(args) -> CouplingSpec:
    if args.coupling == "power":
        return CouplingSpec.power(args.sigma)
    return CouplingSpec()


def params_from_args(args, runtime: float) -> DecoherenceParams:
    spec = coupling_from_args(args)
    explicit = args.a_weight is not None or args.b_weight is not None
    if explicit and args.omega is not None:
        raise ConfigError("--omega and explicit --a/--b are mutually exclusive")
    if explicit:
        return DecoherenceParams(args.a_weight or 0.0, args.b_weight or 0.0, runtime, spec)
    return DecoherenceParams.from_omega(args.omega if args.omega is not None else 0.0, runtime, spec)


def _check_tolerances(args) -> None:
    for key in ("tol", "p_tol"):
        v = getattr(args, key, None)
        if v is not None and not v > 0:
            raise ConfigError(f"{key} must be positive")


def _workers(args) -> int:
    env = os.environ.get(WORKERS_ENV)
    return int(env) if env else int(args.workers)


def cmd_simulate(args) -> int:
    model = SearchModel(args.n)
    params = params_from_args(args, args.runtime)
    try:
        traj = integrate(model, Schedule(model), params, args.tol, n_samples=args.samples)
    except IntegratorError as exc:
        print(f"integrator failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATOR
    write_trajectory_csv(traj, args.out, effective_config(args))
    print(f"{traj.final_probability:.12g}")
    return 0


def write_sweep_csv(records, path, header_lines) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.writelines(line + "\n" for line in header_lines)
        fh.write(SWEEP_CSV_HEADER + "\n")
        fh.writelines(r.csv() + "\n" for r in records)


def write_slope_csv(fits, path, header_lines) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.writelines(line + "\n" for line in header_lines)
        fh.write(SLOPE_CSV_HEADER + "\n")
        fh.writelines(f.csv() + "\n" for f in fits)


def read_sweep_csv(path) -> list[SweepRecord]:
    """Parse a sweep CSV; raises ValueError on any malformed content."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    if not lines or lines[0].strip() != SWEEP_CSV_HEADER:
        raise ValueError(f"{path}: missing or wrong header")
    out = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 6:
            raise ValueError(f"{path}: expected 6 fields, got {ln!r}")
        w, n, t, p, it, flag = parts
        out.append(SweepRecord(float(w), int(n), float(t), float(p), int(it), flag))
    return out


def read_slope_csv(path) -> dict[float, float]:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    if not lines or lines[0].strip() != SLOPE_CSV_HEADER:
        raise ValueError(f"{path}: missing or wrong header")
    return {float(ln.split(",")[0]): float(ln.split(",")[1]) for ln in lines[1:]}


def _grid(args) -> tuple[list[float], list[int]]:
    omegas, ns = _float_list(args.omegas), _int_list(args.ns)
    if not omegas:
        raise ConfigError("empty omega list")
    if not ns:
        raise ConfigError("empty N list")
    if any(not 0.0 <= w <= 1.0 for w in omegas):
        raise ConfigError("omegas must lie in [0, 1]")
    if ns != sorted(ns) or any(n < 2 or n & (n - 1) for n in ns):
        raise ConfigError("N list must be sorted powers of two")
    return omegas, ns


def cmd_sweep(args) -> int:
    omegas, ns = _grid(args)
    window = None
    if args.window:
        lo, hi = _int_list(args.window)
        window = (lo, hi)
    records = scaling_sweep(omegas, ns, coupling_from_args(args), args.target, args.p_tol, args.tol,
                            workers=_workers(args))
    header = effective_config(args)
    write_sweep_csv(records, args.out, header)
    fits = fit_all(records, window)
    write_slope_csv(fits, args.slope_out, header)
    for f in fits:
        print(f"omega={f.omega:g} slope={f.slope:.12g} window={f.fit_window[0]}..{f.fit_window[1]}")
    for n, lo, hi in omega_monotone_violations(records):
        log.warning("run time decreases from omega=%g to omega=%g at N=%d", lo, hi, n)
    ok = sum(r.ok for r in records)
    return 0 if ok >= 0.9 * len(records) else EXIT_SWEEP


def cmd_bounds(args) -> int:
    omegas = _float_list(args.omegas)
    ns = _int_list(args.ns)
    if not omegas or not ns:
        raise ConfigError("empty grid")
    spec = coupling_from_args(args)
    rows = []
    for n in ns:
        model = SearchModel(n)
        sched = Schedule(model)
        k = k_fluctuation(spec, model)
        zt = zeta(spec, model)
        runtimes = _float_list(args.runtimes) or [f * n for f in _float_list(args.runtime_factors)]
        for T in runtimes:
            for w in omegas:
                params = DecoherenceParams.from_omega(w, T, spec)
                try:
                    p = success_probability(model, sched, params, args.tol)
                except IntegratorError as exc:
                    print(f"integrator failure: {exc}", file=sys.stderr)
                    return EXIT_INTEGRATOR
                general = (bnd.lower_bound_general(n, T, params.a_weight, params.b_weight, k)
                           if params.a_weight > 0 else math.nan)
                wide = (bnd.lower_bound_wide_open(n, T, spec.sigma)
                        if params.a_weight == 0 and spec.sigma >= 1 else math.nan)
                rows.append(bnd.BoundRow(n, T, w, spec.sigma, p, general, wide, k, zt))
    with open(args.out, "w", newline="\n") as fh:
        fh.writelines(line + "\n" for line in effective_config(args))
        fh.write(bnd.BOUND_CSV_HEADER + "\n")
        fh.writelines(r.csv() + "\n" for r in rows)
    worst = min(r.slack for r in rows)
    print(f"rows={len(rows)} min_slack={worst:.12g}")
    return 0


def cmd_verify(args) -> int:
    from .verify import CHECKS, run_checks

    names = [s for s in args.only.split(",") if s] or None
    if names and any(n not in CHECKS for n in names):
        raise ConfigError(f"unknown check name in {args.only!r}")
    results = run_checks(names, inject=args.inject)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"FAILED: {', '.join(failed)}")
        return EXIT_VERIFY
    print(f"all {len(results)} checks passed")
    return 0


def cmd_figure1(args) -> int:
    if args.sweep_csv:
        try:
            records = read_sweep_csv(args.sweep_csv)
        except (OSError, ValueError) as exc:
            print(f"malformed sweep CSV: {exc}", file=sys.stderr)
            return EXIT_CSV
        if not records:
            print("malformed sweep CSV: no rows", file=sys.stderr)
            return EXIT_CSV
    else:
        omegas, ns = _grid(args)
        records = scaling_sweep(omegas, ns, coupling_from_args(args), args.target, args.p_tol, args.tol,
                                workers=_workers(args))
    if args.slope_csv:
        try:
            slopes = read_slope_csv(args.slope_csv)
        except (OSError, ValueError, IndexError) as exc:
            print(f"malformed slope CSV: {exc}", file=sys.stderr)
            return EXIT_CSV
    else:
        slopes = {f.omega: f.slope for f in fit_all(records)}
    curves: dict[float, list[tuple[int, float]]] = {}
    for r in records:
        if r.ok:
            curves.setdefault(r.omega, []).append((r.n_items, r.runtime_at_target))
    svg = render_scaling_figure(curves, slopes)
    cfg = "\n".join(effective_config(args)).replace("--", "- -")
    svg = svg.replace("<svg ", f"<!--\n{cfg}\n-->\n<svg ", 1)
    Path(args.out).write_text(svg)
    print(f"wrote {args.out} with {len(curves)} curves")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "bounds": cmd_bounds,
    "verify": cmd_verify,
    "figure1": cmd_figure1,
}


def main(argv: list[str] | None = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _check_tolerances(args)
        return COMMANDS[args.command](args)
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
