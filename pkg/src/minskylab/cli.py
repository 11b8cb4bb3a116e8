"""Command-line front end: ``minskylab <command> [options]``.

Exit codes: 0 success, 2 simulation ended in a crisis, 1 any error.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .dynamics import IntegrationConfig, classify_behaviour
from .equilibrium import analyse_fixed_point
from .errors import ConfigError, DivergentDebtError, DomainError, MinskyError, NoRootError, SingularityError
from .experiments import MAX_SWEEP_CELLS, catalog, get_scenario, monte_carlo, sweep
from .keen import (InvestmentFunction, KeenState, infinite_debt_attractive, keen_debt_divergence,
                   keen_fixed_point, keen_simulate)
from .model import ModelParams
from .output import fmt, write_ensemble_csv, write_fixed_point, write_sweep_csv, write_trajectory_csv
from .svg import ensemble_svg, trajectory_svg

EXIT_OK, EXIT_ERROR, EXIT_CRISIS = 0, 1, 2
MAX_AXES = 3


class CliError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise CliError(f"cannot parse number list {text!r}") from exc
    if not vals:
        raise CliError(f"empty number list {text!r}")
    return vals


def _load(args):
    if getattr(args, "config", None) and getattr(args, "scenario", None):
        raise CliError("give either --config or --scenario, not both")
    if getattr(args, "config", None):
        sc = cfgmod.load_scenario(args.config)
    elif getattr(args, "scenario", None):
        try:
            sc = get_scenario(args.scenario)
        except KeyError as exc:
            raise CliError(f"{exc.args[0]}; see `minskylab catalog`") from exc
    else:
        raise CliError("a scenario is required: --config FILE or --scenario NAME")
    if getattr(args, "seed", None) is not None and sc.driver.is_stochastic:
        sc = dataclasses.replace(sc, driver=sc.driver.with_seed(args.seed))
    return sc


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _write_text(path, text):
    Path(path).write_text(text, encoding="utf-8")


def cmd_simulate(args) -> int:
    sc = _load(args)
    traj = sc.run()
    fh, close = _open_out(args.out)
    try:
        n = write_trajectory_csv(traj, fh)
    finally:
        if close:
            fh.close()
    if args.svg:
        _write_text(args.svg, trajectory_svg(traj, title=f"{sc.name}: {traj.termination}"))
    # With the CSV on stdout the summary goes to stderr so the CSV stays clean.
    log = sys.stderr if fh is sys.stdout else sys.stdout
    s = traj.summary
    verdict = classify_behaviour(traj).value if traj.termination.kind in ("completed", "crisis") else traj.termination.kind
    print(f"{sc.name}: {traj.termination}; {n} rows; behaviour {verdict}; "
          f"lambda in [{s['lambda_min']:.6g}, {s['lambda_max']:.6g}], mean omega {s['omega_mean']:.6g}", file=log)
    if traj.termination.kind == "crisis":
        return EXIT_CRISIS
    if traj.termination.kind != "completed":
        return EXIT_ERROR
    return EXIT_OK


def cmd_fixed_point(args) -> int:
    sc = _load(args)
    alpha = sc.driver.initial_alpha if args.alpha is None else args.alpha
    try:
        report = analyse_fixed_point(sc.params, alpha)
    except DomainError as exc:
        raise CliError(f"no fixed point: employment needs Phillips(lambda) = alpha with alpha > -c4; {exc}") from exc
    except SingularityError as exc:
        raise CliError(f"no fixed point: needs 1 + eta2*alpha != 0 and nu > d_bar; {exc}") from exc
    write_fixed_point(report, sys.stdout, args.format)
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    sc = _load(argparse.Namespace(config=args.config, scenario=args.scenario, seed=None))
    if not sc.driver.is_stochastic:
        raise CliError(f"montecarlo needs a stochastic driver; {sc.name} uses kind = {sc.driver.kind!r}")
    if args.runs < 1:
        raise CliError("--runs must be >= 1")
    summary = monte_carlo(sc, n_runs=args.runs, base_seed=args.seed)
    fh, close = _open_out(args.out)
    try:
        write_ensemble_csv(summary, fh)
    finally:
        if close:
            fh.close()
    if args.svg:
        _write_text(args.svg, ensemble_svg(summary, title=f"{sc.name}: mean of {summary.n_runs} runs"))
    log = sys.stderr if fh is sys.stdout else sys.stdout
    late = summary.times >= 50
    print(f"{sc.name}: {summary.n_runs} runs, {summary.crisis_count} crises; after t=50 mean employment "
          f"{np.nanmean(summary.mean['employment'][late]):.6g}, mean wages share "
          f"{np.nanmean(summary.mean['wage_share'][late]):.6g}", file=log)
    return EXIT_OK


def _parse_axis(text: str):
    name, sep, vals = text.partition("=")
    if not sep or not name.strip():
        raise CliError(f"--axis expects name=v1,v2,..., got {text!r}")
    return name.strip(), _float_list(vals)


def cmd_sweep(args) -> int:
    sc = _load(args)
    if not args.axis:
        raise CliError("sweep needs at least one --axis")
    if len(args.axis) > MAX_AXES:
        raise CliError(f"at most {MAX_AXES} axes, got {len(args.axis)}")
    axes = dict(_parse_axis(a) for a in args.axis)
    if len(axes) != len(args.axis):
        raise CliError("each axis may be given once")
    result = sweep(sc, axes, max_cells=args.max_cells)
    fh, close = _open_out(args.out)
    try:
        write_sweep_csv(result, fh)
    finally:
        if close:
            fh.close()
    return EXIT_OK


def _keen_inputs(args):
    params = _load(args).params if (args.config or args.scenario) else ModelParams()
    kappa = InvestmentFunction(args.kappa0, args.kappa1, args.kappa2, args.kappa3)
    return params, kappa


def cmd_keen(args) -> int:
    params, kappa = _keen_inputs(args)
    try:
        if args.keen_cmd == "fixed-point":
            fp = keen_fixed_point(params, kappa, args.alpha)
            attractive, diag = infinite_debt_attractive(params, kappa, args.alpha)
            rows = [("lambda_bar", fp.lambda_bar), ("d_bar", fp.d_bar), ("omega_bar", fp.omega_bar),
                    ("pi_bar", fp.pi_bar)]
            for k, v in rows:
                print(f"{k:<26}{fmt(v)}")
            print(f"{'infinite_debt_attractive':<26}{str(attractive).lower()}  "
                  f"(eigenvalues {', '.join(fmt(x) for x in diag)})")
        elif args.keen_cmd == "divergence":
            alphas = _float_list(args.alphas)
            d = keen_debt_divergence(params, kappa, alphas)
            print("alpha,d_bar")
            for a, v in zip(alphas, d):
                print(f"{fmt(a)},{fmt(v)}")
        else:
            if args.dt is None:
                config = IntegrationConfig(horizon=args.horizon)
            else:
                config = IntegrationConfig(dt=args.dt, horizon=args.horizon)
            init = KeenState(args.omega, args.employment, args.debt)
            t, xs = keen_simulate(params, kappa, init, args.alpha, config, chart=args.chart)
            fh, close = _open_out(args.out)
            try:
                fh.write("t,wage_share,employment,debt\n")
                for ti, row in zip(t, xs):
                    fh.write(",".join(fmt(v) if math.isfinite(v) else ("inf" if v > 0 else fmt(v))
                                      for v in (ti, *row)) + "\n")
            finally:
                if close:
                    fh.close()
    except DivergentDebtError as exc:
        raise CliError(f"DivergentDebt: {exc}") from exc
    except NoRootError as exc:
        raise CliError(f"NoRoot: investment can never balance nu*(alpha+delta); {exc}") from exc
    return EXIT_OK


def cmd_catalog(args) -> int:
    scenarios = catalog()
    if args.write:
        out = Path(args.write)
        out.mkdir(parents=True, exist_ok=True)
        for sc in scenarios:
            _write_text(out / f"{sc.name}.toml", cfgmod.scenario_to_toml(sc))
        print(f"wrote {len(scenarios)} scenario files to {out}")
        return EXIT_OK
    width = max(len(sc.name) for sc in scenarios)
    for sc in scenarios:
        print(f"{sc.name:<{width}}  {sc.description}")
    return EXIT_OK


def _add_scenario_args(p, seed=True):
    p.add_argument("--config", help="TOML scenario file")
    p.add_argument("--scenario", help="built-in scenario name (see `catalog`)")
    if seed:
        p.add_argument("--seed", type=int, help="override the stochastic driver seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="minskylab", description="Growth-cycle model with Minsky-type debt.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one scenario and write a trajectory CSV")
    _add_scenario_args(p)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--svg", help="also write a panel plot here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fixed-point", help="fixed point, characteristic polynomial and stability")
    _add_scenario_args(p, seed=False)
    p.add_argument("--alpha", type=float, help="productivity growth (default: the driver's initial value)")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=cmd_fixed_point)

    p = sub.add_parser("montecarlo", help="ensemble statistics for a stochastic scenario")
    _add_scenario_args(p, seed=False)
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0, help="base seed; run i uses splitmix64(seed ^ i)")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("sweep", help="classify every cell of a parameter grid")
    _add_scenario_args(p, seed=False)
    p.add_argument("--axis", action="append", default=[], metavar="NAME=V1,V2,...")
    p.add_argument("--max-cells", type=int, default=MAX_SWEEP_CELLS)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("keen", help="Keen-type models with explicit investment")
    ks = p.add_subparsers(dest="keen_cmd", required=True)
    for name in ("fixed-point", "divergence", "simulate"):
        q = ks.add_parser(name)
        _add_scenario_args(q, seed=False)
        q.add_argument("--kappa0", type=float, default=0.03)
        q.add_argument("--kappa1", type=float, default=0.03)
        q.add_argument("--kappa2", type=float, default=10.0)
        q.add_argument("--kappa3", type=float, default=0.0, help="debt sensitivity; 0 is the profit-only model")
        if name != "divergence":
            q.add_argument("--alpha", type=float, default=0.02)
        q.set_defaults(func=cmd_keen)
        if name == "divergence":
            q.add_argument("--alphas", default="0.02,0.01,0.005,0.0025")
        if name == "simulate":
            q.add_argument("--chart", choices=("d", "u"), default="d")
            q.add_argument("--horizon", type=float, default=100.0)
            q.add_argument("--dt", type=float)
            q.add_argument("--omega", type=float, default=0.8)
            q.add_argument("--employment", type=float, default=0.9)
            q.add_argument("--debt", type=float, default=0.5)
            q.add_argument("--out", help="CSV path (default: stdout)")

    p = sub.add_parser("catalog", help="list built-in scenarios")
    p.add_argument("--write", metavar="DIR", help="write each scenario as a TOML file into DIR")
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        where = f" [{exc.key}]" if exc.key else ""
        print(f"error{where}: {exc}", file=sys.stderr)
    except (CliError, MinskyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
