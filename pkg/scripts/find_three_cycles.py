"""Random search for systems with three nested crossing limit cycles.

Both zones are foci with small traces, which is where nested cycles live:
D_L = 1 and a_L = +-1 fix the scale of the left zone, the rest is drawn on a
dyadic grid so hits can be stored exactly.  Every hit is re-run on a finer
grid, certified, and its cycles are closed by direct integration.

    python3 scripts/find_three_cycles.py --seed 0 --budget 300 --out found.toml
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from pwlcycles.counting import certify
from pwlcycles.displacement import find_cycles
from pwlcycles.errors import PWLError
from pwlcycles.lienard import CanonicalPWL
from pwlcycles.trajectory import close_cycle

QUANTUM = 4096


def draw(rng: np.random.Generator) -> CanonicalPWL:
    T_L, T_R = rng.uniform(-0.3, 0.3, 2)
    D_R = rng.uniform(0.3, 3.0)
    a_L = float(rng.choice([-1.0, 1.0]))
    a_R = rng.uniform(-2.0, 2.0)
    b = rng.uniform(-0.6, 0.6)
    vals = (T_L, 1.0, a_L, T_R, D_R, a_R, b)
    return CanonicalPWL(*(float(round(v * QUANTUM) / QUANTUM) for v in vals))


def validate(c: CanonicalPWL, closure_tol: float = 1e-6) -> dict | None:
    """Fine-grid search, certification and trajectory closure; None if any step fails."""
    try:
        search = find_cycles(c, 512)
        if len(search.cycles) != 3:
            return None
        report = certify(c, search)
        closures = [close_cycle(c, r.y0_star).closure_error for r in search.cycles]
    except PWLError:
        return None
    stab = [r.stability for r in search.cycles]
    if not report.certified or max(closures) > closure_tol or stab[0] == stab[1] or stab[1] == stab[2]:
        return None
    return {"y0": [r.y0_star for r in search.cycles], "stability": stab, "closure": closures}


def to_toml(c: CanonicalPWL, info: dict) -> str:
    lines = [f"# {len(info['y0'])} crossing limit cycles: " + ", ".join(info["stability"]), "[canonical]"]
    lines += [f"{k} = {v!r}" for k, v in zip(("T_L", "D_L", "a_L", "T_R", "D_R", "a_R", "b"), c.as_tuple())]
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=float, default=300.0, help="wall-clock seconds")
    p.add_argument("--grid", type=int, default=128, help="coarse search grid")
    p.add_argument("--out", help="write the first validated hit as a TOML system file")
    args = p.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    t0 = time.perf_counter()
    tried = 0
    while time.perf_counter() - t0 < args.budget:
        c = draw(rng)
        tried += 1
        try:
            n = len(find_cycles(c, args.grid).cycles)
        except PWLError:
            continue
        if n < 3:
            continue
        info = validate(c)
        if info is None:
            continue
        print(f"hit after {tried} draws: {c.as_tuple()}")
        for y0, s, e in zip(info["y0"], info["stability"], info["closure"]):
            print(f"  y0* = {y0:.12g}  {s:10s}  closure error {e:.1e}")
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(to_toml(c, info))
        return 0
    print(f"no validated three-cycle system in {tried} draws", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
