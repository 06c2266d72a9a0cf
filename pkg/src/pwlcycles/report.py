"""Full analysis of one system, bundled for JSON output."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .counting import CountReport, certify
from .displacement import CycleSearch, find_cycles, interval_I_b
from .errors import PWLError
from .halfmap import DEFAULT_TOL, HalfMapSample, half_map, left_intervals
from .lienard import DEFAULT_CAP, CanonicalPWL, GeneralPWL, canonical_of

SAMPLE_N = 33  # rows per half-map sample table


@dataclass
class AnalysisReport:
    canonical: CanonicalPWL
    search: CycleSearch
    count: CountReport | None
    samples: dict[str, list[HalfMapSample]] = field(default_factory=dict)
    general: GeneralPWL | None = None
    warnings: list[str] = field(default_factory=list)
    tol: float = DEFAULT_TOL
    cap: float = DEFAULT_CAP

    @property
    def certified(self) -> bool:
        return self.count is not None and self.count.certified

    @property
    def violation(self) -> bool:
        return self.count is not None and self.count.violation

    def to_dict(self) -> dict:
        return {
            "input": {
                "general": None if self.general is None else asdict(self.general),
                "canonical": asdict(self.canonical),
            },
            "search": self.search.to_dict(),
            "count": None if self.count is None else self.count.to_dict(),
            "samples": {k: [asdict(s) for s in v] for k, v in self.samples.items()},
            "warnings": list(self.warnings),
            "tol": self.tol,
            "cap": self.cap,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisReport":
        g = d["input"]["general"]
        general = None
        if g is not None:
            general = GeneralPWL.from_arrays(g["A_L"], g["A_R"], g["b_L"], g["b_R"])
        return cls(
            canonical=CanonicalPWL(**d["input"]["canonical"]),
            search=CycleSearch.from_dict(d["search"]),
            count=None if d["count"] is None else CountReport.from_dict(d["count"]),
            samples={k: [HalfMapSample(**s) for s in v] for k, v in d["samples"].items()},
            general=general,
            warnings=list(d["warnings"]),
            tol=d["tol"],
            cap=d["cap"],
        )

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        return cls.from_dict(json.loads(text))


def _table(T, D, a, ys, sigma, shift=0.0) -> list[HalfMapSample]:
    y1, tf, res, ok = half_map(T, D, a, ys - shift, sigma)
    return [
        HalfMapSample(float(y), float(v + shift), float(t), float(r))
        for y, v, t, r, good in zip(ys, y1, tf, res, ok)
        if good
    ]


def half_map_tables(c: CanonicalPWL, n: int = SAMPLE_N, cap: float = DEFAULT_CAP) -> dict[str, list[HalfMapSample]]:
    """y_L on its domain and y_R^b on I_b, sampled at n interior points."""
    out = {}
    dom = left_intervals(c, cap).domain
    if not dom.degenerate:
        ys = np.linspace(dom.lo, dom.hi, n + 2)[1:-1]
        out["y_L"] = _table(c.T_L, c.D_L, c.a_L, ys, +1)
    I_b = interval_I_b(c, cap)
    if not I_b.degenerate:
        ys = np.linspace(I_b.lo, I_b.hi, n + 2)[1:-1]
        out["y_R^b"] = _table(c.T_R, c.D_R, c.a_R, ys, -1, c.b)
    return out


def analyze(
    system: GeneralPWL | CanonicalPWL,
    tol: float = DEFAULT_TOL,
    grid_n: int = 512,
    cap: float = DEFAULT_CAP,
    trace_n: int = 2048,
) -> AnalysisReport:
    """Search, certify and sample one system.

    NoCrossingDynamics from the reduction propagates; failures further down
    are kept as warnings and leave the report uncertified.
    """
    c = canonical_of(system)
    general = system if isinstance(system, GeneralPWL) else None
    warnings: list[str] = []
    search = find_cycles(c, grid_n, tol, cap)
    warnings.extend(search.warnings)
    count = None
    try:
        count = certify(c, search, tol, cap, grid_n, trace_n)
    except PWLError as exc:
        warnings.append(f"certification failed: {type(exc).__name__}: {exc}")
    return AnalysisReport(c, search, count, half_map_tables(c, cap=cap), general, warnings, tol, cap)
