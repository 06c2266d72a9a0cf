"""Randomized certification sweeps over canonical parameters."""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .counting import GLOBAL_CEILING, certify
from .displacement import find_cycles
from .errors import PWLError
from .halfmap import DEFAULT_TOL
from .lienard import DEFAULT_CAP, CanonicalPWL

STRATA = ("generic", "T_L=0", "D_L=0", "a_L=0", "4D=T^2")
ALL_STRATA = STRATA + ("continuous",)
QUANTUM = 2.0**-12  # draws are dyadic so exact arithmetic stays small
PARAM_NAMES = ("T_L", "D_L", "a_L", "T_R", "D_R", "a_R", "b")


@dataclass(frozen=True)
class SweepConfig:
    n: int = 100
    seed: int = 0
    strata: tuple[str, ...] = STRATA
    grid_n: int = 256
    trace_n: int = 1024
    tol: float = DEFAULT_TOL
    cap: float = DEFAULT_CAP
    threads: int = 1
    heavy_fraction: float = 0.2

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        bad = [s for s in self.strata if s not in ALL_STRATA]
        if bad or not self.strata:
            raise ValueError(f"unknown strata {bad}; choose from {ALL_STRATA}")


@dataclass
class SweepRow:
    index: int
    stratum: str
    params: tuple[float, ...]
    cycles: int
    boundary_suspects: int
    continuum: bool
    k: int
    N: int
    intersection_bound: int
    observed_intersections: int
    certified: bool
    violation: bool
    notes: str = ""


@dataclass
class SweepSummary:
    n: int
    seed: int
    max_cycles: int
    max_k: int
    max_N: int
    max_intersections: int
    violations: int
    certified: int
    uncertified: int
    per_stratum: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _q(v: float) -> float:
    return float(np.round(v / QUANTUM) * QUANTUM)


def _value(rng: np.random.Generator, heavy: float) -> float:
    if rng.random() < heavy:
        # heavy tail, clipped so the cap-truncated domains stay meaningful
        return float(np.clip(rng.standard_cauchy(), -1e3, 1e3))
    return float(rng.uniform(-3.0, 3.0))


def draw_system(rng: np.random.Generator, stratum: str, heavy: float = 0.2) -> CanonicalPWL:
    p = {k: _q(_value(rng, heavy)) for k in PARAM_NAMES}
    if stratum == "T_L=0":
        p["T_L"] = 0.0
    elif stratum == "D_L=0":
        p["D_L"] = 0.0
    elif stratum == "a_L=0":
        p["a_L"] = 0.0
    elif stratum == "4D=T^2":
        # T_L is dyadic, so T_L^2 / 4 is exact
        p["D_L"] = p["T_L"] ** 2 / 4
        if rng.random() < 0.5:
            p["D_R"] = p["T_R"] ** 2 / 4
    elif stratum == "continuous":
        p["b"] = 0.0
        p["a_R"] = p["a_L"]
    return CanonicalPWL(**p)


def instance(config: SweepConfig, i: int) -> tuple[str, CanonicalPWL]:
    rng = np.random.default_rng([config.seed, i])
    stratum = config.strata[i % len(config.strata)]
    return stratum, draw_system(rng, stratum, config.heavy_fraction)


def run_instance(config: SweepConfig, i: int) -> SweepRow:
    stratum, c = instance(config, i)
    try:
        search = find_cycles(c, config.grid_n, config.tol, config.cap)
        rep = certify(c, search, config.tol, config.cap, config.grid_n, config.trace_n)
    except PWLError as exc:
        return SweepRow(i, stratum, c.as_tuple(), 0, 0, False, 0, 0, 0, 0, False, False, f"{type(exc).__name__}: {exc}")
    return SweepRow(
        i,
        stratum,
        c.as_tuple(),
        len(search.cycles),
        len(search.boundary_suspects),
        search.continuum,
        rep.k_contacts,
        rep.n_branches,
        rep.intersection_bound,
        rep.observed_intersections,
        rep.certified,
        rep.violation or len(search.cycles) > GLOBAL_CEILING,
        "; ".join(rep.notes),
    )


def _run_chunk(args):
    config, idx = args
    return [run_instance(config, i) for i in idx]


def run_sweep(config: SweepConfig, progress=None) -> tuple[list[SweepRow], SweepSummary]:
    idx = list(range(config.n))
    if config.threads <= 1:
        rows = []
        for i in idx:
            rows.append(run_instance(config, i))
            if progress:
                progress(i + 1, config.n)
    else:
        chunks = [idx[j :: config.threads] for j in range(config.threads)]
        with ProcessPoolExecutor(config.threads) as ex:
            parts = list(ex.map(_run_chunk, [(config, ch) for ch in chunks]))
        rows = sorted((r for part in parts for r in part), key=lambda r: r.index)
    return rows, summarize(config, rows)


def summarize(config: SweepConfig, rows: list[SweepRow]) -> SweepSummary:
    per = {}
    for s in config.strata:
        rs = [r for r in rows if r.stratum == s]
        per[s] = {
            "n": len(rs),
            "max_cycles": max((r.cycles for r in rs), default=0),
            "certified": sum(r.certified for r in rs),
            "bounds": sorted({r.intersection_bound + 1 for r in rs if r.certified}),
        }
    return SweepSummary(
        n=len(rows),
        seed=config.seed,
        max_cycles=max((r.cycles for r in rows), default=0),
        max_k=max((r.k for r in rows), default=0),
        max_N=max((r.N for r in rows), default=0),
        max_intersections=max((r.observed_intersections for r in rows), default=0),
        violations=sum(r.violation for r in rows),
        certified=sum(r.certified for r in rows),
        uncertified=sum(not r.certified for r in rows),
        per_stratum=per,
    )


def rows_to_csv(config: SweepConfig, rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        ["seed", "index", "stratum", *PARAM_NAMES, "cycles", "boundary_suspects", "continuum", "k", "N",
         "intersection_bound", "cycle_bound", "observed_intersections", "certified", "violation", "notes"]
    )
    for r in rows:
        w.writerow(
            [config.seed, r.index, r.stratum, *(f"{v:.17g}" for v in r.params), r.cycles, r.boundary_suspects,
             int(r.continuum), r.k, r.N, r.intersection_bound, r.intersection_bound + 1, r.observed_intersections,
             int(r.certified), int(r.violation), r.notes]
        )
    return buf.getvalue()


def default_threads() -> int:
    return os.cpu_count() or 1
