"""End-to-end acceptance run: one test, and one printed PASS/FAIL line, per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the summary lines.
"""

import time
from fractions import Fraction
from math import factorial

import pytest

from rspin import correlators as C
from rspin.hierarchy import build_L0, build_phi0
from rspin.verify import run_suite

RS = (2, 3, 4, 5)


def report(n, title, problems, start):
    status = "PASS" if not problems else "FAIL"
    line = f"[criterion {n}] {status} {title} ({time.perf_counter() - start:.1f}s)"
    if problems:
        line += ": " + "; ".join(problems[:3])
    print(line)
    assert not problems, line


def both(engine, ins):
    return engine.extended(ins), engine.hierarchy_extended(ins)


def d_at_zero(series, *indices):
    exps = [0] * series.space.count
    for i in indices:
        exps[i - 1] += 1
    mult = 1
    for e in exps:
        mult *= factorial(e)
    return series.coefficient(tuple(exps)) * mult


def test_1_base_correlators(get_engine):
    start, problems = time.perf_counter(), []
    for r in RS:
        E = get_engine(r, r + 1, 0)
        for ins, want in (([(1, 0), (r - 2, 0)], 1), ([(1, 0), (r - 1, 0), (r - 1, 0)], Fraction(-1, r))):
            for name, got in zip(("recursion", "hierarchy"), both(E, ins)):
                if got != want:
                    problems.append(f"r={r} {ins} {name} gave {got}, expected {want}")
    assert time.perf_counter() - start < 60
    report(1, "base correlators, both pipelines, r=2..5", problems, start)


def test_2_x_series(get_engine):
    start, problems = time.perf_counter(), []
    for r in RS:
        E = get_engine(r, r + 1, 0)
        for a in range(r):
            want = Fraction((-1) ** a * factorial(a), r**a)
            for name, got in zip(("recursion", "hierarchy"), both(E, [(a, 0)] + [(r - 1, 0)] * (a + 1))):
                if got != want:
                    problems.append(f"r={r} alpha={a} {name} gave {got}, expected {want}")
        anchor = Fraction((-1) ** (r - 1) * factorial(r - 1), r ** (r - 1))
        if E.hierarchy_extended([(r - 1, 0)] * (r + 1)) != anchor:
            problems.append(f"r={r} anchor")
    report(2, "X series and anchor, both pipelines, r=2..5", problems, start)


@pytest.mark.parametrize("r", [2, 3, 4])
def test_3_theorem_crosscheck(get_engine, r):
    start = time.perf_counter()
    rep = get_engine(r, 6, 2).crosscheck()
    problems = [] if not rep.mismatches else [rep.summary()]
    if not rep.nonzero():
        problems.append("no nonzero keys compared")
    report(3, f"recursion equals hierarchy on {len(rep.rows)} keys, r={r}", problems, start)


def test_4_phi0_values():
    start, problems = time.perf_counter(), []
    for r in RS:
        N = 2 * r
        phi = build_phi0(r, 3, N, build_L0(r, 2, N)).series
        for idx, want in (((1, r), r), ((2, r - 1), 2 * (r - 1)), ((2, r, r), 2 * r * r)):
            got = d_at_zero(phi, *idx)
            if got != want:
                problems.append(f"r={r} d/dT{idx} = {got}, expected {want}")
    report(4, "phi0 jet values, r=2..5", problems, start)


def test_5_closed_sector(get_engine):
    start, problems = time.perf_counter(), []
    for r in RS:
        E = get_engine(r, 5, 1)
        for g in range(r - 2):
            v = E.closed([(1, 0), (g, 0), (r - 3 - g, 0)])
            if v != 1:
                problems.append(f"r={r} gamma={g} gave {v}")
        bad = C.check_ramond_vanishing(E)
        if bad:
            problems.append(f"r={r} {bad}")
    if get_engine(2, 5, 1).closed([(0, 0)] * 3) != 1:
        problems.append("r=2 <tau^0 tau^0 tau^0> != 1")
    report(5, "closed three-point values, Ramond vanishing, KdV sanity", problems, start)


SUITES = ("strings", "flows", "homogeneity", "trr", "dispersive")


@pytest.mark.parametrize("r", [2, 3, 4])
def test_6_property_suites(get_engine, r):
    start, problems = time.perf_counter(), []
    E = get_engine(r, 6 if r < 4 else 5, 2)
    for name in SUITES:
        res = run_suite(name, E)
        if not res.passed:
            problems.append(res.line())
    report(6, f"property suites {', '.join(SUITES)}, r={r}", problems, start)


@pytest.mark.parametrize("r", [2, 3, 4])
def test_7_open_sector(get_engine, r):
    start, problems = time.perf_counter(), []
    E = get_engine(r, 6 if r < 4 else 5, 2)
    for check in (C.check_open_dictionary, C.check_open_trrs):
        bad = check(E)
        if bad:
            problems.append(bad)
    for ins in ([(0, 0)], [(0, 0), (1, 0)], [(1, 0)] * 3):
        if E.open(ins, 0) != 0:
            problems.append(f"m=0 open correlator {ins} nonzero")
    report(7, f"open dictionary, open TRRs, m=0 vanishing, r={r}", problems, start)


@pytest.mark.parametrize("r", [2, 3])
def test_8_lax_identity(get_engine, r):
    start = time.perf_counter()
    ok, bad = C.lax_identity(get_engine(r, 6, 2), 5)
    report(8, f"Lax identity to degree 5, r={r}", [] if ok else [f"first differing term {bad}"], start)
