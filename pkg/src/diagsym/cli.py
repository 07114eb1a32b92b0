"""Command-line entry point.

Exit codes: 0 ok, 2 unreadable or malformed input, 3 degenerate fit,
4 numerical failure, 5 bad flags.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, DegenerateFit, NumericalError, ParseError, TableError
from .report import AnalysisConfig, parse_csv, render, run_analysis

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DEGENERATE = 3
EXIT_NUMERICAL = 4
EXIT_FLAGS = 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FLAGS, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="diagsym",
        description="Fit symmetry-family models to a square contingency table.",
    )
    p.add_argument("csv", help="CSV file with the table, or - for standard input")
    p.add_argument("--models", default="all", help="comma list of s,cs,dps,dgs,gs or 'all'")
    p.add_argument("--stat", choices=("g2", "wald", "both"), default="both")
    p.add_argument("--family", default="kl", help="comma list of kl,rkl,pearson,power")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="power-divergence parameter (required with --family power)")
    p.add_argument("--smooth", type=float, default=None, metavar="C",
                   help="add C to every cell before fitting")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--tolerance", type=float, default=1e-8,
                   help="relative threshold for reporting a partition as additive")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = AnalysisConfig(
            models=args.models,
            statistic=args.stat,
            families=args.family,
            lam=args.lam,
            smoothing=args.smooth,
            output_format=args.format,
            tolerance=args.tolerance,
        )
    except ConfigError as exc:
        print(f"diagsym: error: {exc}", file=sys.stderr)
        return EXIT_FLAGS

    try:
        if args.csv == "-":
            table = parse_csv(sys.stdin)
        else:
            with open(args.csv, encoding="utf-8", newline="") as fh:
                table = parse_csv(fh)
    except (OSError, UnicodeDecodeError, ParseError, TableError) as exc:
        print(f"diagsym: cannot read {args.csv}: {exc}", file=sys.stderr)
        return EXIT_PARSE

    try:
        result = run_analysis(table, config)
    except DegenerateFit as exc:
        print(f"diagsym: degenerate fit: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except NumericalError as exc:
        print(f"diagsym: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    for note in result.warnings:
        print(f"diagsym: warning: {note}", file=sys.stderr)
    sys.stdout.write(render(result, config.output_format))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
