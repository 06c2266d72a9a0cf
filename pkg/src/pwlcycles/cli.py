"""Command-line entry point: canon, analyze, sweep and plot.

Exit codes: 0 certified (or success), 1 unreadable system file, 2 no
crossing dynamics, 3 analysis not certified, 4 a cycle bound was violated.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from .displacement import cycles_to_csv
from .errors import NoCrossingDynamics, NotApplicable, PWLError, SpecFileError
from .halfmap import DEFAULT_TOL
from .lienard import DEFAULT_CAP, canonical_of, load_system
from .report import analyze
from .svg import plot
from .sweep import ALL_STRATA, STRATA, SweepConfig, default_threads, rows_to_csv, run_sweep

EXIT_OK, EXIT_PARSE, EXIT_NO_CROSSING, EXIT_UNCERTIFIED, EXIT_VIOLATION = 0, 1, 2, 3, 4

log = logging.getLogger("pwlcycles")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(path: str):
    """(system, exit code); the code is nonzero when the file is unusable."""
    try:
        system = load_system(path)
        return canonical_of(system), system, EXIT_OK
    except SpecFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None, None, EXIT_PARSE
    except NoCrossingDynamics as exc:
        print(f"no crossing dynamics: {exc}", file=sys.stderr)
        return None, None, EXIT_NO_CROSSING


def cmd_canon(args) -> int:
    c, _, code = _load(args.system)
    if code:
        return code
    _emit(json.dumps(asdict(c), indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_analyze(args) -> int:
    c, system, code = _load(args.system)
    if code:
        return code
    try:
        rep = analyze(system, args.tol, args.grid, args.cap)
    except PWLError as exc:
        print(f"analysis failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_UNCERTIFIED
    if args.csv:
        _emit(cycles_to_csv(rep.search.cycles), args.out)
    else:
        _emit(rep.to_json() + "\n", args.out)
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if rep.violation:
        print("BOUND VIOLATED: observed counts exceed the certified bound", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK if rep.certified else EXIT_UNCERTIFIED


def cmd_sweep(args) -> int:
    config = SweepConfig(
        n=args.n, seed=args.seed, strata=tuple(args.strata), grid_n=args.grid, tol=args.tol, cap=args.cap,
        threads=args.threads,
    )
    rows, summary = run_sweep(config)
    _emit(rows_to_csv(config, rows), args.out)
    text = summary.to_json() + "\n"
    if args.summary:
        Path(args.summary).write_text(text)
    else:
        sys.stderr.write(text)
    return EXIT_VIOLATION if summary.violations else EXIT_OK


def cmd_plot(args) -> int:
    c, _, code = _load(args.system)
    if code:
        return code
    try:
        svg = plot(c, args.what, args.tol, args.grid, args.cap)
    except NotApplicable as exc:
        print(f"warning: plot skipped: {exc}", file=sys.stderr)
        return EXIT_OK
    _emit(svg, args.out)
    return EXIT_OK


def _numeric_flags(p: argparse.ArgumentParser, grid: int = 512) -> None:
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="half-map and zero tolerance")
    p.add_argument("--grid", type=int, default=grid, help="displacement search grid size")
    p.add_argument("--cap", type=float, default=DEFAULT_CAP, help="truncation of unbounded intervals")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pwlcycles", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("canon", help="print the canonical parameters of a system file")
    p.add_argument("system")
    p.add_argument("--out")
    p.set_defaults(func=cmd_canon)

    p = sub.add_parser("analyze", help="find, classify and certify crossing limit cycles")
    p.add_argument("system")
    _numeric_flags(p)
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="full JSON report (default)")
    fmt.add_argument("--csv", action="store_true", help="cycle table only")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="certify many random systems")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strata", nargs="+", choices=ALL_STRATA, default=list(STRATA))
    p.add_argument("--threads", type=int, default=default_threads())
    _numeric_flags(p, grid=256)
    p.add_argument("--out", help="CSV destination (default stdout)")
    p.add_argument("--summary", help="summary JSON destination (default stderr)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot", help="write an SVG diagnostic")
    p.add_argument("system")
    p.add_argument("--what", choices=("halfmaps", "delta", "contact"), default="halfmaps")
    _numeric_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "n", 1) < 1:
        print("error: --n must be at least 1", file=sys.stderr)
        return EXIT_PARSE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
