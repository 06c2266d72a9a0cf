import numpy as np
import pytest

from pwlcycles.lienard import CanonicalPWL
from pwlcycles.sweep import QUANTUM, SweepConfig, instance, rows_to_csv, run_sweep


def test_same_seed_same_csv():
    cfg = SweepConfig(n=15, seed=5, grid_n=128, trace_n=512)
    a = rows_to_csv(cfg, run_sweep(cfg)[0])
    b = rows_to_csv(cfg, run_sweep(cfg)[0])
    assert a == b


def test_parallel_matches_serial():
    serial = SweepConfig(n=10, seed=2, grid_n=128, trace_n=512, threads=1)
    parallel = SweepConfig(n=10, seed=2, grid_n=128, trace_n=512, threads=2)
    assert rows_to_csv(serial, run_sweep(serial)[0]) == rows_to_csv(serial, run_sweep(parallel)[0])


def test_draws_are_dyadic_and_strata_hold():
    cfg = SweepConfig(n=60, seed=9, strata=("T_L=0", "D_L=0", "a_L=0", "4D=T^2", "continuous"))
    for i in range(cfg.n):
        stratum, c = instance(cfg, i)
        for v in c.as_tuple():
            assert v / QUANTUM == np.round(v / QUANTUM) or stratum == "4D=T^2"
        if stratum == "T_L=0":
            assert c.T_L == 0
        elif stratum == "D_L=0":
            assert c.D_L == 0
        elif stratum == "a_L=0":
            assert c.a_L == 0
        elif stratum == "4D=T^2":
            assert 4 * c.D_L == c.T_L**2
        else:
            assert c.b == 0 and c.a_R == c.a_L


def test_line_stratum_bound_is_five():
    cfg = SweepConfig(n=12, seed=4, strata=("T_L=0",), grid_n=128, trace_n=512)
    rows, summary = run_sweep(cfg)
    assert summary.per_stratum["T_L=0"]["bounds"] in ([5], [])
    assert all(r.intersection_bound == 4 for r in rows if r.certified)


def test_summary_counts():
    cfg = SweepConfig(n=20, seed=1, grid_n=128, trace_n=512)
    rows, s = run_sweep(cfg)
    assert s.n == 20 and s.certified + s.uncertified == 20
    assert s.violations == 0
    assert s.max_cycles <= 8
    assert sum(v["n"] for v in s.per_stratum.values()) == 20


@pytest.mark.parametrize("kw", [{"n": 0}, {"strata": ("bogus",)}, {"strata": ()}])
def test_bad_config_rejected(kw):
    with pytest.raises(ValueError):
        SweepConfig(**kw)


def test_csv_header_and_precision():
    cfg = SweepConfig(n=1, seed=0, grid_n=128, trace_n=512)
    text = rows_to_csv(cfg, run_sweep(cfg)[0])
    head, row = text.splitlines()
    assert head.startswith("seed,index,stratum,T_L,")
    params = [float(v) for v in row.split(",")[3:10]]
    assert CanonicalPWL(*params) == instance(cfg, 0)[1]
