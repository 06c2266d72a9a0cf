"""Certification sweep with progress, CSV rows and a summary table.

    python3 scripts/run_sweep.py --n 10000 --seed 2024 --out sweep.csv
"""

from __future__ import annotations

import argparse
import sys
import time

from pwlcycles.sweep import ALL_STRATA, STRATA, SweepConfig, default_threads, rows_to_csv, run_sweep


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strata", nargs="+", choices=ALL_STRATA, default=list(STRATA))
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--threads", type=int, default=default_threads())
    p.add_argument("--out", help="CSV destination")
    p.add_argument("--summary", help="summary JSON destination")
    args = p.parse_args(argv)

    config = SweepConfig(n=args.n, seed=args.seed, strata=tuple(args.strata), grid_n=args.grid, threads=args.threads)
    step = max(1, args.n // 20)

    def progress(done: int, total: int):
        if done % step == 0 or done == total:
            print(f"\r{done}/{total}", end="", file=sys.stderr, flush=True)

    t0 = time.perf_counter()
    rows, summary = run_sweep(config, progress)
    elapsed = time.perf_counter() - t0
    print(file=sys.stderr)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(rows_to_csv(config, rows))
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(summary.to_json() + "\n")

    print(f"{summary.n} systems in {elapsed:.0f} s, seed {summary.seed}")
    print(f"certified {summary.certified}, uncertified {summary.uncertified}, violations {summary.violations}")
    print(f"max cycles {summary.max_cycles}, max k {summary.max_k}, max N {summary.max_N}, "
          f"max intersections {summary.max_intersections}")
    print(f"{'stratum':10s} {'n':>6s} {'certified':>10s} {'max cycles':>11s}  cycle bounds")
    for name, s in summary.per_stratum.items():
        print(f"{name:10s} {s['n']:6d} {s['certified']:10d} {s['max_cycles']:11d}  {s['bounds']}")
    return 4 if summary.violations else 0


if __name__ == "__main__":
    sys.exit(main())
