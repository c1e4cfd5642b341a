"""Command line front end.

Subcommands: presets, analyze (closed-form only), simulate (Monte Carlo
only), compare (both plus KS), sweep (figure recipes from a config file
or flags). Exit codes: 0 success, 2 validation error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import sys

from . import analytic, approx, harness, montecarlo
from .analytic import ChannelStats, QuadratureError
from .geometry import correlation_matrix, preset_grid, preset_names
from .harness import SweepSpec, parse_config, run_sweep
from .montecarlo import SeedSpec, SimConfig
from .specfun import DomainError, NonConvergenceError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _common_system_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", required=True, help="named port layout, see `presets`")
    p.add_argument("--users", type=int, default=20)
    p.add_argument("--delta", type=float, default=1.0, help="residual interference factor in (0,1]")
    p.add_argument("--omega", type=float, default=1.0, help="average channel power")
    p.add_argument("--gamma-th", type=float, default=1.0, help="outage rate threshold (bits)")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cumasim", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("presets", help="list named port layouts")

    p = sub.add_parser("analyze", help="closed-form metrics only")
    _common_system_flags(p)
    p.add_argument("--rs", type=float, default=None, help="secrecy rate; needs --eve-preset")
    p.add_argument("--eve-preset", default=None)
    p.add_argument("--delta-e", type=float, default=1.0)

    p = sub.add_parser("simulate", help="Monte Carlo metrics only")
    _common_system_flags(p)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("compare", help="closed-form, exact and Monte Carlo side by side")
    _common_system_flags(p)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quad-tol", type=float, default=1e-6)
    p.add_argument("--exact", choices=("auto", "on", "off"), default="auto")

    p = sub.add_parser("sweep", help="run a sweep from a config file or flags")
    p.add_argument("--config", help="key = value sweep description")
    p.add_argument("--out", help="CSV output path (overrides the config)")
    p.add_argument("--preset")
    p.add_argument("--eve-preset")
    p.add_argument("--axis", choices=("users", "rs", "delta_b", "ports"))
    p.add_argument("--values", help="comma separated axis values")
    p.add_argument("--metrics", help="comma separated subset of er,op,sop,sop_lower")
    p.add_argument("--users", type=int, default=20)
    p.add_argument("--gamma-th", type=float, default=1.0)
    p.add_argument("--rs", type=float, default=1.0)
    p.add_argument("--delta-b", type=float, default=1.0)
    p.add_argument("--delta-e", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quad-tol", type=float, default=1e-6)
    p.add_argument("--exact", choices=("auto", "on", "off"), default="auto")
    p.add_argument("--no-mc", action="store_true", help="skip Monte Carlo columns")
    return ap


def _cmd_presets() -> int:
    print(f"{'name':<10} {'grid':>9} {'ports':>6} {'spacing (wl)':>14}")
    for name in preset_names():
        g = preset_grid(name)
        s1, s2 = g.spacings
        print(f"{name:<10} {g.n1:>4}x{g.n2:<4} {g.total_ports:>6} {s1:>7.4f},{s2:.4f}")
    return EXIT_OK


def _stats_for(args) -> ChannelStats:
    return ChannelStats.from_grid(preset_grid(args.preset), args.users, delta=args.delta, omega=args.omega)


def _cmd_analyze(args) -> int:
    stats = _stats_for(args)
    beta_raw = approx.beta_I(stats)
    beta = stats.sigma2_sq * beta_raw
    print(f"preset = {args.preset}")
    print(f"users = {args.users}")
    print(f"nbar = {stats.nbar}")
    print(f"mu = {stats.mu:.9g}")
    print(f"sigma1_sq = {stats.sigma1_sq:.9g}")
    print(f"sigma2_sq = {stats.sigma2_sq:.9g}")
    print(f"beta = {beta_raw:.9g}")
    print(f"er_approx = {approx.approx_er(args.users, beta, stats.sigma2_sq):.9g}")
    print(f"op_approx = {approx.approx_op(args.gamma_th, beta, stats.sigma2_sq):.9g}")
    if args.rs is not None:
        if args.eve_preset is None:
            raise DomainError("--rs needs --eve-preset")
        eve = ChannelStats.from_grid(
            preset_grid(args.eve_preset), args.users, delta=args.delta_e, omega=args.omega
        )
        print(f"sop_lower_approx = {approx.sop_lower_closed(beta_raw, approx.beta_I(eve), args.rs):.9g}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    grid = preset_grid(args.preset)
    config = SimConfig(
        corr=correlation_matrix(grid), users=args.users, delta=args.delta, omega=args.omega
    )
    m = montecarlo.mc_metrics(
        config, args.trials, SeedSpec(args.seed), gamma_grid=(args.gamma_th,), workers=args.workers
    )
    print(f"preset = {args.preset}")
    print(f"trials = {m.trials}")
    print(f"er_mc = {m.er:.9g} +- {m.er_stderr:.3g}")
    print(f"op_mc[{args.gamma_th:g}] = {m.op[0]:.9g} +- {m.op_stderr[0]:.3g}")
    print(f"mean_sir = {m.mean_sir:.9g}")
    print(f"mean_k_i = {m.mean_k_i:.9g}")
    print(f"redrawn = {m.redrawn}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    grid = preset_grid(args.preset)
    stats = _stats_for(args)
    exact_on = args.exact == "on" or (args.exact == "auto" and stats.interferers <= 19)
    beta = stats.sigma2_sq * approx.beta_I(stats)
    seed = SeedSpec(args.seed)
    config = SimConfig(corr=correlation_matrix(grid), users=args.users, delta=args.delta, omega=args.omega)
    m = montecarlo.mc_metrics(config, args.trials, seed, gamma_grid=(args.gamma_th,))
    ks = harness.compare_distributions(
        grid, args.users, args.trials, seed, delta=args.delta, omega=args.omega
    )
    print(f"preset = {args.preset}  users = {args.users}  trials = {args.trials}")
    print(f"er: approx = {approx.approx_er(args.users, beta, stats.sigma2_sq):.6g}", end="")
    if exact_on:
        print(f"  exact = {analytic.exact_er(args.users, stats, args.quad_tol):.6g}", end="")
    print(f"  mc = {m.er:.6g} +- {m.er_stderr:.3g}")
    print(f"op[{args.gamma_th:g}]: approx = {approx.approx_op(args.gamma_th, beta, stats.sigma2_sq):.6g}", end="")
    if exact_on:
        print(f"  exact = {analytic.exact_op(args.gamma_th, stats, args.quad_tol):.6g}", end="")
    print(f"  mc = {m.op[0]:.6g} +- {m.op_stderr[0]:.3g}")
    print(f"ks_total_vs_fit = {ks.ks_total:.4f}")
    print(f"ks_inphase_vs_fit = {ks.ks_inphase:.4f}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    if args.config:
        with open(args.config) as fh:
            spec = parse_config(fh.read())
        if args.out:
            spec = SweepSpec(**{**spec.__dict__, "out": args.out})
    else:
        if not (args.axis and args.values and args.metrics):
            raise DomainError("sweep needs --config or all of --axis/--values/--metrics")
        spec = SweepSpec(
            axis=args.axis,
            values=tuple(float(v) for v in args.values.split(",")),
            metrics=tuple(m.strip() for m in args.metrics.split(",")),
            preset=args.preset,
            eve_preset=args.eve_preset,
            users=args.users,
            gamma_th=args.gamma_th,
            rs=args.rs,
            delta_b=args.delta_b,
            delta_e=args.delta_e,
            trials=args.trials,
            seed=args.seed,
            quad_tol=args.quad_tol,
            exact=args.exact,
            mc=not args.no_mc,
            out=args.out,
        )
    report = run_sweep(spec)
    if not spec.out:
        sys.stdout.write(report.to_csv())
    else:
        print(f"wrote {len(report.rows)} rows to {spec.out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "presets":
            return _cmd_presets()
        if args.command == "analyze":
            return _cmd_analyze(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "compare":
            return _cmd_compare(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        raise DomainError(f"unknown command {args.command!r}")
    except (DomainError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NonConvergenceError, QuadratureError, OverflowError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
