"""Named property suites over one :class:`~rspin.correlators.Engine`.

Every suite returns a :class:`SuiteResult`; a suite passes when all of its
checks hold, and otherwise reports the first counterexample it met.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import correlators as C
from .hierarchy import (
    LaxJet,
    bell_by_recursion,
    build_L0,
    build_L_dispersive,
    build_phi0,
    build_phi_dispersive,
    check_flows_L0,
    check_flows_dispersive,
    check_flows_phi0,
    dispersive_layer,
    faa_di_bruno,
    string_defect,
    trim_layers,
    two_point_closed,
    weight,
    _restrict_symbol,
)
from .errors import RSpinError
from .pdo import power, rth_root
from .scalar import EpsScalar
from .series import TSeries
from .zsymbol import mul

__all__ = ["SUITES", "SuiteResult", "run_suite", "run_suites", "corrupt_jet"]


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checks: list[tuple[str, str | None]] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def first_failure(self) -> tuple[str, str] | None:
        for label, problem in self.checks:
            if problem is not None:
                return label, problem
        return None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name} ({len(self.checks)} checks, {self.seconds:.1f}s)"
        bad = self.first_failure
        if bad:
            text += f": {bad[0]}: {bad[1]}"
        return text


# -- individual checks --------------------------------------------------------


def _theorem(engine: C.Engine):
    report = engine.crosscheck()
    bad = report.mismatches
    yield "extended keys agree", None if not bad else report.summary()
    yield "Lax identity", None if report.lax_ok else f"first differing term {report.lax_first_bad}"


def _strings(engine: C.Engine):
    d = string_defect(engine.phi0.series, engine.r)
    yield "string equation for phi0", None if not d else f"defect {d.to_text()[:200]}"
    yield "extended string (hierarchy values)", C.check_string(engine, "hierarchy")
    yield "extended string (recursion values)", C.check_string(engine, "recursion")


def _trr(engine: C.Engine):
    yield "general TRR choice independence", C.check_trr_choices(engine)
    yield "NS and Ramond TRRs", C.check_specialized_trrs(engine)
    yield "-1 TRR", C.check_minus_one_trr(engine)


def root_checks(L0: LaxJet) -> str | None:
    """``(L0^(1/r))^r = L0`` and the root is the only one with leading ``z``."""
    r = L0.r
    depth = 1 - r - 2
    root = L0.fractional_power(1, depth)
    back = root
    for _ in range(r - 1):
        back = mul(back, root, 0)
    if not back.agrees_with(L0.symbol, 0):
        return "(L0^(1/r))^r differs from L0"
    # perturb one subleading coefficient: the r-th power must move
    bumped = root + type(root).z_power(root.space, root.cap, -1)
    back = bumped
    for _ in range(r - 1):
        back = mul(back, bumped, 0)
    if back.agrees_with(L0.symbol, 0):
        return "a different root reproduced L0"
    return None


def pdo_root_check(r: int, cap: int, N: int) -> str | None:
    L = build_L_dispersive(r, cap, N, 1, check=False)
    op = L.symbol
    root = rth_root(op, -r)
    if not power(root, r, 0).agrees_with(op, 0):
        return "(L^(1/r))^r differs from L for the dispersive operator"
    return None


def _flows(engine: C.Engine):
    L0 = engine.L0
    bad = check_flows_L0(L0)
    yield "every flow on L0", None if bad is None else f"flow T_{bad} fails"
    sym = _restrict_symbol(L0.symbol, engine.phi0.series.space, engine.phi0.cap)
    bad = check_flows_phi0(engine.phi0, sym)
    yield "every flow on phi0", None if bad is None else f"flow T_{bad} fails"
    yield "root of L0", root_checks(L0)
    yield "root of the dispersive L", pdo_root_check(engine.r, 3, 2 * engine.r)
    F = engine.F0_closed_T
    FxT = F.derivative(0)
    cap = F.cap - 2
    problem = None
    for n in range(1, engine.N + 1):
        lhs = FxT.derivative(n - 1).truncate(cap)
        if lhs != L0.residue_power(n).truncate(cap):
            problem = f"res L0^({n}/r) differs from d2F/dT1dT{n}"
            break
    yield "residues are second derivatives of F", problem
    problem = None
    r = engine.r
    for a in range(1, r):
        for b in range(1, r):
            if two_point_closed(a, b, L0, engine.V, cap) != two_point_closed(b, a, L0, engine.V, cap):
                problem = f"two-point ({a},{b}) not symmetric"
            elif two_point_closed(a, b, L0, engine.V, cap) != F.derivative(a - 1).derivative(b - 1).truncate(cap):
                problem = f"two-point ({a},{b}) differs from F"
    yield "two-point symmetry", problem


def _homogeneity(engine: C.Engine):
    r = engine.r
    problem = None
    for i in range(r - 1):
        for exps, _ in engine.L0.f(i).items():
            if weight(r, exps) != r - i:
                problem = f"f_{i} monomial {exps} has weight {weight(r, exps)}"
                break
    yield "f_i weights", problem
    problem = None
    for exps, _ in engine.phi0.series.items():
        if weight(r, exps) != r + 1:
            problem = f"phi0 monomial {exps} has weight {weight(r, exps)}"
            break
    yield "phi0 weights", problem
    yield "dimension constraints", C.check_dimension(engine)
    try:
        C.rationalize(C.to_t_variables(engine.F0_closed_T, engine.cov))
        C.extended_from_phi0(engine.phi0, engine.cov)
        yield "rational t-coefficients", None
    except Exception as exc:  # NotRationalError signals a grading bug
        yield "rational t-coefficients", str(exc)


def _ramond(engine: C.Engine):
    r = engine.r
    yield "Ramond vanishing", C.check_ramond_vanishing(engine)
    problem = None
    for g in range(r - 2):
        v = engine.closed([(1, 0), (g, 0), (r - 3 - g, 0)])
        if v != 1:
            problem = f"<tau^1 tau^{g} tau^{r - 3 - g}> = {v}"
    yield "closed three-point values", problem
    yield "closed <tau^0 tau^0 tau^(r-2)>", None if engine.closed([(0, 0), (0, 0), (r - 2, 0)]) == 1 else "not 1"


def _open(engine: C.Engine):
    yield "open dictionary", C.check_open_dictionary(engine)
    yield "open TRRs", C.check_open_trrs(engine)


def _lax(engine: C.Engine):
    ok, bad = C.lax_identity(engine)
    yield "Lax identity", None if ok else f"first differing term {bad}"


def dispersive_checks(r: int, cap: int = 3, N: int | None = None, g_max: int = 1):
    N = 2 * r if N is None else N
    L = build_L_dispersive(r, cap, N, g_max)
    bad = check_flows_dispersive(L)
    yield "dispersive flows", None if bad is None else f"flow T_{bad} fails"
    L0 = build_L0(r, cap, N)
    problem = None
    for i in range(r - 1):
        if dispersive_layer(L, i, 0) != L0.f(i):
            problem = f"eps^0 layer of F_{i} differs from L0"
    yield "leading layer is L0", problem
    problem = None
    for i in range(r - 1):
        for exps, c in L.f(i).items():
            for g, q in c.coeffs.items():
                if not 0 <= g <= g_max + 1:
                    problem = f"F_{i} has an eps^{g} term"
                elif q and weight(r, exps) != r - i - g * (r + 1):
                    problem = f"F_{i} layer {g} monomial {exps} has the wrong weight"
    yield "eps shape of L", problem
    phi = build_phi_dispersive(r, cap + 1, N, g_max, L)
    phi0 = build_phi0(r, cap + 1, N, L0)
    yield "phi layer 0 is phi0", None if phi.layer(0) == phi0.series else "layers differ"
    problem = None
    for g in range(g_max + 1):
        for exps, _ in phi.layer(g).items():
            if weight(r, exps) != (r + 1) * (1 - g):
                problem = f"phi layer {g} monomial {exps} has the wrong weight"
    yield "phi homogeneity", problem
    psi = phi.series
    eps = EpsScalar.eps(0, g_max, 1)
    unit = EpsScalar(0, g_max, {0: 1})
    ys, d, ep = [], psi, None
    for j in range(1, 5):
        d = d.derivative(0)
        ys.append(d if ep is None else d.scale(ep))
        ep = eps if ep is None else ep * eps
    rec = bell_by_recursion(4, psi, eps, unit)
    problem = None
    for i in range(5):
        if trim_layers(faa_di_bruno(i, ys, unit), psi.cap - i) != trim_layers(rec[i], psi.cap - i):
            problem = f"Bell polynomial {i} disagrees with the recursion"
    yield "Faa di Bruno against recursion", problem
    d = trim_layers(string_defect(psi, r), psi.cap - 1)
    yield "string equation for phi", None if not d else "defect"


def _dispersive(engine: C.Engine):
    yield from dispersive_checks(engine.r, 3 if engine.r <= 3 else 2, 2 * engine.r, 1)


SUITES: dict[str, Callable] = {
    "theorem": _theorem,
    "strings": _strings,
    "trr": _trr,
    "flows": _flows,
    "homogeneity": _homogeneity,
    "ramond": _ramond,
    "open": _open,
    "lax": _lax,
    "dispersive": _dispersive,
}


def run_suite(name: str, engine: C.Engine) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(name)
    start = time.perf_counter()
    checks = []
    try:
        for item in SUITES[name](engine):
            checks.append(item)
    except RSpinError as exc:
        checks.append(("error", f"{type(exc).__name__}: {exc}"))
    passed = all(problem is None for _, problem in checks)
    return SuiteResult(name, passed, checks, time.perf_counter() - start)


def run_suites(names, engine: C.Engine) -> list[SuiteResult]:
    return [run_suite(n, engine) for n in names]


def corrupt_jet(engine: C.Engine, var: int | None = None, delta: Fraction = Fraction(1)) -> int:
    """Perturb one coefficient of ``f_0`` in the engine's L0 jet, for negative tests.

    The perturbed monomial is ``T_1 T_var`` (default the highest flow variable
    that is not a multiple of ``r``). Returns the variable index used.
    """
    L0 = engine.L0
    r, N = L0.r, L0.N
    if var is None:
        var = max(a for a in range(2, N + 1) if a % r)
    f0 = L0.symbol.coeffs[0]
    exps = [0] * N
    exps[0] += 1
    exps[var - 1] += 1
    extra = TSeries.from_dict(f0.space, f0.cap, {tuple(exps): delta})
    L0.symbol.coeffs[0] = f0 + extra
    L0._cache.clear()
    return var
