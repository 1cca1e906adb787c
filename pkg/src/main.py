#!/usr/bin/env python3
"""
Main entry point for the prior-data conflict checker.

This module provides a command-line interface for running divergence-based
conflict checks, hierarchical checks, exact p-value curves, large-sample
limits and the worked-example reproductions.

Settings are layered: model defaults, then ``--config`` (a flat JSON object),
then explicit flags, then ``--set key=value,...`` which wins over everything.
"""

import argparse
import logging
import sys

from src.cli import (
    EXAMPLES, cmd_asymptotic, cmd_check, cmd_curve, cmd_hier_check, cmd_reproduce,
    load_config_file, parse_set, resolve,
)
from src.core.errors import (
    ConfigError, NumericalAbortError, UnsupportedOperationError, ValidationError,
)
from src.divergence.order import DivergenceOrder
from src.models.catalog import MODELS

EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def add_run_arguments(parser: argparse.ArgumentParser, needs_data: bool = True):
    """Flags shared by the model-driven subcommands."""
    parser.add_argument("--model", required=True, choices=sorted(MODELS),
                        help="Model to check")
    parser.add_argument("--set", dest="set_values", default=None,
                        help="Overrides as k1=v1,k2=v2 (model parameters, run keys, fit.<name>)")
    parser.add_argument("--config", default=None, help="JSON file of settings")
    if needs_data:
        parser.add_argument("--data", default=None, help="CSV with a y column, or unit,y,n")
    parser.add_argument("--order", default=None, help="Divergence order: kl, mr or alpha:<x>")
    parser.add_argument("--M", type=int, default=None, help="Number of prior-predictive replicates")
    parser.add_argument("--inner-draws", dest="inner_draws", type=int, default=None,
                        help="theta2 draws per replicate in hierarchical checks")
    parser.add_argument("--seed", type=int, default=None, help="Master seed")
    parser.add_argument("--workers", type=int, default=None, help="Parallel workers (default: all cores)")
    parser.add_argument("--output", default=None, help="Report path (JSON)")
    parser.add_argument("--keep-replicates", dest="keep_replicates", action="store_true", default=None,
                        help="Include the replicate discrepancy vector in the report")
    parser.add_argument("--trace", default=None,
                        help="CSV path for the ELBO trace of the observed-data fit (variational models)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Prior-data conflict checks with Renyi divergences",
        epilog="Precedence: --set > flags > --config > model defaults.")
    parser.add_argument("--quiet", action="store_true", help="Only log warnings and errors")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="Prior-predictive divergence check")
    add_run_arguments(check)
    check.add_argument("--em", action="store_true", help="Evans-Moshonov check instead")

    hier = sub.add_parser("hier-check", help="Hierarchical prior checks")
    add_run_arguments(hier)
    hier.add_argument("--level", type=int, choices=(1, 2), default=1,
                      help="1: conditional prior of theta1, 2: marginal prior of theta2")
    hier.add_argument("--unit", default=None, help="Unit label or 0-based row")
    hier.add_argument("--all-units", dest="all_units", action="store_true", help="Check every unit")
    hier.add_argument("--cv", action="store_true", help="Cross-validated (held-out) check")
    hier.add_argument("--one-sided", dest="one_sided", action="store_true",
                      help="Flag excess only")

    curve = sub.add_parser("curve", help="Exact p-value curves of the shifted-exponential model")
    curve.add_argument("--nu", type=float, nargs="+", default=[2.0, 8.0, 50.0])
    curve.add_argument("--t-min", dest="t_min", type=float, default=1e-3)
    curve.add_argument("--t-max", dest="t_max", type=float, default=200.0)
    curve.add_argument("--points", type=int, default=200)
    curve.add_argument("--order", default="kl")
    curve.add_argument("--output", default=None, help="CSV path (stdout when omitted)")

    asym = sub.add_parser("asymptotic", help="Large-sample limiting p-value at theta*")
    add_run_arguments(asym, needs_data=False)
    asym.add_argument("--theta-star", dest="theta_star", type=float, nargs="+", required=True)
    asym.add_argument("--n-draws", dest="n_draws", type=int, default=100_000)
    asym.add_argument("--jeffreys", action="store_true", help="Use the Jeffreys prior (binomial)")
    asym.add_argument("--hierarchical", action="store_true",
                      help="Limit for the conditional prior of theta1")

    rep = sub.add_parser("reproduce", help="Reproduce a worked example")
    rep.add_argument("example", type=int, choices=sorted(EXAMPLES))
    rep.add_argument("--output", default="results", help="Output directory")
    rep.add_argument("--seed", type=int, default=2024)
    rep.add_argument("--workers", type=int, default=None)
    rep.add_argument("--data-dir", dest="data_dir", default=None)
    return parser


def run_config(args):
    flags = {key: getattr(args, key, None) for key in
             ("data", "order", "M", "inner_draws", "seed", "workers", "output", "keep_replicates",
              "trace")}
    return resolve(args.model, load_config_file(args.config), flags, parse_set(args.set_values))


def dispatch(args) -> int:
    if args.command == "check":
        return cmd_check(run_config(args), evans_moshonov=args.em)
    if args.command == "hier-check":
        unit = args.unit
        if unit is not None and unit.isdigit():
            unit = int(unit)
        return cmd_hier_check(run_config(args), args.level, unit, args.all_units, args.cv, args.one_sided)
    if args.command == "curve":
        try:
            order = DivergenceOrder.parse(args.order)
        except ValidationError as exc:
            raise ConfigError("order", str(exc)) from exc
        return cmd_curve(args.nu, args.t_min, args.t_max, args.points, order, args.output)
    if args.command == "asymptotic":
        return cmd_asymptotic(run_config(args), args.theta_star, args.n_draws,
                              args.jeffreys, args.hierarchical)
    return cmd_reproduce(args.example, args.output, args.seed, args.workers, args.data_dir)


def main(argv=None) -> int:
    """Main function to run the checker. Returns the exit status."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format='%(asctime)s - %(levelname)s - %(message)s')
    try:
        return dispatch(args)
    except ConfigError as exc:
        print(f"❌ Configuration error: {exc}", file=sys.stderr)
    except (ValidationError, UnsupportedOperationError, FileNotFoundError) as exc:
        print(f"❌ {exc}", file=sys.stderr)
    except NumericalAbortError as exc:
        print(f"❌ Numerical failure: {exc}", file=sys.stderr)
        for key, value in exc.diagnostics.items():
            print(f"   {key}: {value}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
