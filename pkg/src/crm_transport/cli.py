"""Command-line entry point: ``crm-transport run | verify | list``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage
errors and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import ConfigError
from .experiments import COMMON, EXPERIMENTS, NumericalFailure, format_defaults, parse_config, run, summary_text, write_outputs

EXIT_OK, EXIT_CHECKS, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3


def _param_flags() -> dict[str, str]:
    """``param name -> help`` over all experiments."""
    flags: dict[str, str] = {}
    for exp in EXPERIMENTS.values():
        for p in exp.params + COMMON:
            flags.setdefault(p.name, p.help or p.kind)
    return flags


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crm-transport",
        description="Transport distances between completely random measures and posterior merging experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment and write CSV curves plus a summary")
    r.add_argument("--experiment", help="experiment name (see 'crm-transport list')")
    r.add_argument("--seed", help="unsigned 64-bit master seed (required for stochastic experiments)")
    r.add_argument("--config", type=Path, help="key = value config file; flags override it")
    r.add_argument("--out", type=Path, help="output directory (default: out/<experiment>)")
    grid = r.add_argument_group("parameter flags (each applies only to experiments that declare it)")
    for name, help_text in sorted(_param_flags().items()):
        grid.add_argument("--" + name.replace("_", "-"), dest="p_" + name, metavar="VALUE", help=help_text)
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="any parameter, repeatable")

    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--seed", default="0", help="master seed (default 0)")
    v.add_argument("--out", type=Path, help="directory for the criterion CSVs")
    v.add_argument("--only", type=int, nargs="+", metavar="N", help="run only these criteria")

    ls = sub.add_parser("list", help="list experiments, or print the defaults of one")
    ls.add_argument("experiment", nargs="?")
    return parser


def _overrides(args) -> dict[str, str]:
    out = {k[2:]: v for k, v in vars(args).items() if k.startswith("p_") and v is not None}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = (s.strip() for s in item.split("=", 1))
        if k in out and out[k] != v:
            raise ConfigError(f"parameter {k!r} given twice")
        out[k] = v
    return out


def _cmd_run(args) -> int:
    text = args.config.read_text() if args.config is not None else None
    cfg = parse_config(args.experiment, args.seed, text, _overrides(args))
    result = run(cfg)
    out = write_outputs(cfg, result, args.out if args.out is not None else Path("out") / cfg.experiment)
    sys.stdout.write(summary_text(cfg, result))
    print(f"outputs written to {out}")
    return EXIT_OK if result.passed else EXIT_CHECKS


def _cmd_verify(args) -> int:
    from .acceptance import run_acceptance
    from .experiments import parse_seed

    results = run_acceptance(parse_seed(args.seed), args.out, only=args.only)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_OK if not failed else EXIT_CHECKS


def _cmd_list(args) -> int:
    if args.experiment is None:
        for e in EXPERIMENTS.values():
            kind = "stochastic" if e.stochastic else "deterministic"
            print(f"{e.name:32s} {kind:14s} {e.description}")
        return EXIT_OK
    if args.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {args.experiment!r}")
    sys.stdout.write(format_defaults(args.experiment))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"run": _cmd_run, "verify": _cmd_verify, "list": _cmd_list}[args.command]
    try:
        return handler(args)
    except (ConfigError, OSError) as exc:
        print(f"crm-transport: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFailure, FloatingPointError, ArithmeticError) as exc:
        print(f"crm-transport: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
