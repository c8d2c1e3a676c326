"""Command-line driver.

Exit codes: 0 success, 2 parse/config error, 3 math-domain error.  Errors are
reported on stderr as one line of JSON: ``{"error": <type>, "message": <text>}``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from bonkl import scenarios
from bonkl.bestofn import bon_pmf
from bonkl.bounds import kl_report
from bonkl.errors import BonError, ConfigError, InputError
from bonkl.experiments import (
    MCVAR_COLUMNS,
    SWEEP_COLUMNS,
    SweepConfig,
    format_csv,
    mc_variance_study,
    parse_grid,
    reproduce_figure,
    run_sweep,
)
from bonkl.policy import read_distribution

EXIT_INPUT = 2
EXIT_MATH = 3


def _fail(kind: str, message: str, code: int):
    sys.stderr.write(json.dumps({"error": kind, "message": message}, sort_keys=True) + "\n")
    sys.exit(code)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail("UsageError", message, EXIT_INPUT)


def _resolve_seed(arg: int | None) -> int:
    if arg is not None:
        seed = arg
    else:
        env = os.environ.get("BON_SEED")
        if env is None:
            return 0
        try:
            seed = int(env)
        except ValueError:
            raise ConfigError(f"BON_SEED is not an integer: {env!r}") from None
    if not (0 <= seed < 2**64):
        raise ConfigError("seed must be a 64-bit unsigned integer")
    return seed


def _load(args):
    if args.builtin is not None:
        return scenarios.builtin(args.builtin)
    return read_distribution(args.dist, jitter=args.jitter, seed=_resolve_seed(args.seed))


def _sweep_config(args) -> SweepConfig:
    return SweepConfig(
        n_grid=parse_grid(args.n_grid),
        dist=Path(args.dist) if args.dist else None,
        builtin=args.builtin,
        mc_samples=args.mc_samples,
        seed=_resolve_seed(args.seed),
        output=Path(args.out) if args.out else None,
        svg=Path(args.svg) if args.svg else None,
        jitter=args.jitter,
    )


def cmd_pmf(args) -> None:
    p = _load(args)
    pi = bon_pmf(p, args.n)
    out = sys.stdout
    out.write("outcome_id\treward\tprob\tbon_prob\n")
    for oid, r, q, b in zip(p.outcome_ids, p.rewards, p.probs, pi.probs):
        out.write(f"{oid}\t{float(r)!r}\t{'%.17g' % q}\t{'%.17g' % b}\n")


def cmd_report(args) -> None:
    rep = kl_report(_load(args), args.n).check()
    sys.stdout.write(json.dumps(rep.as_dict(), sort_keys=True, indent=2) + "\n")


def cmd_sweep(args) -> None:
    cfg = _sweep_config(args)
    rows = run_sweep(cfg)
    if cfg.output is None:
        sys.stdout.write(format_csv(rows, SWEEP_COLUMNS))


def cmd_mc_var(args) -> None:
    cfg = _sweep_config(args)
    rows = mc_variance_study(cfg)
    if cfg.output is None:
        sys.stdout.write(format_csv(rows, MCVAR_COLUMNS))


def cmd_reproduce(args) -> None:
    if args.L is not None and args.figure != 2:
        raise ConfigError("--L only applies to --figure 2")
    curves = reproduce_figure(args.figure, Path(args.out_dir), L=args.L)
    for c in curves:
        sys.stdout.write(f"{c.name}\t{c.csv_path}\t{c.svg_path}\n")


def _source_flags(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--dist", help="TSV distribution file (outcome_id, reward, prob)")
    src.add_argument("--builtin", help="example1 | uniform(L) | cherry_left | cherry_right")
    p.add_argument("--jitter", type=float, default=None, help="break reward ties with perturbations below EPS")
    p.add_argument("--seed", type=int, default=None, help="64-bit seed (falls back to $BON_SEED, then 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bonkl", description="Exact KL divergence of best-of-n policies.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("pmf", help="print the best-of-n PMF")
    _source_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_pmf)

    p = sub.add_parser("report", help="print the KL report for one n as JSON")
    _source_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_report)

    for name, func, mc_default in (("sweep", cmd_sweep, 0), ("mc-var", cmd_mc_var, 10000)):
        p = sub.add_parser(name, help="sweep n and write CSV" if name == "sweep" else "estimator variance study")
        _source_flags(p)
        p.add_argument("--n-grid", required=True, help="a:b:logK, a:b, or a comma list")
        p.add_argument("--mc-samples", type=int, default=mc_default)
        p.add_argument("--out", help="CSV path (stdout if omitted)")
        p.add_argument("--svg", help="optional SVG path")
        p.set_defaults(func=func)

    p = sub.add_parser("reproduce", help="regenerate a figure's curves")
    p.add_argument("--figure", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--L", type=int, default=None, help="single alphabet size for figure 2")
    p.add_argument("--out-dir", default=".", help="directory for CSV and SVG files")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except InputError as exc:
        _fail(type(exc).__name__, str(exc), EXIT_INPUT)
    except BonError as exc:
        _fail(type(exc).__name__, str(exc), EXIT_MATH)
    return 0


if __name__ == "__main__":
    sys.exit(main())
