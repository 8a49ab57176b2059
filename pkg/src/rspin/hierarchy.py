"""Jets of the Gelfand-Dickey Lax operator and of the wave-function logarithm.

All jets are built from the slice ``T_2 = T_3 = ... = 0``, where the seed is
known, by integrating one flow per monomial. A monomial ``T^M`` whose largest
variable is ``T_a`` (``a >= 2``) gets its coefficient from the ``T^(M - e_a)``
coefficient of ``dX/dT_a``. The flows are run in stages of increasing degree in
``T_2, T_3, ...`` (``T_1`` does not count): ``d/dx = d/dT_1`` keeps that degree
fixed, so a stage only reads data settled by earlier stages. Every flow, not
just the one used per monomial, is then checked on the finished jet.

Weights: ``T_k`` has weight ``r + 1 - k``; ``f_i`` is homogeneous of weight
``r - i``, the genus-``g`` layer of ``phi`` has weight ``(r + 1)(1 - g)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Any

from .errors import (
    BadIndexError,
    CapExceededError,
    EpsWindowError,
    GenusLeakError,
    InconsistentError,
    InternalInconsistencyError,
    StringCheckFailedError,
)
from .pdo import PDOp, commutator, plus_part, power, rth_root
from .scalar import EpsScalar
from .series import TSeries, VarSpace, substitute_series
from .zsymbol import ZSymbol, fractional_power, poisson, residue, split

__all__ = [
    "LaxJet",
    "PhiJet",
    "VCoords",
    "build_L0",
    "build_phi0",
    "v_coords",
    "two_point_closed",
    "assemble_F0_closed",
    "build_L_dispersive",
    "build_phi_dispersive",
    "trim_layers",
    "weight",
    "check_flows_L0",
    "check_flows_phi0",
    "string_defect",
    "faa_di_bruno",
]


def weight(r: int, exps) -> int:
    return sum((r + 1 - (k + 1)) * e for k, e in enumerate(exps))


def _non_x_degree(exps) -> int:
    return sum(exps) - exps[0]


def _integrate_stage(target: dict[int, Any], rhs: TSeries, a: int, stage: int) -> None:
    """Add ``coef(T^(m+e_a)) = rhs_m / (m_a + 1)`` for monomials ``m`` of ``rhs``
    in stage ``stage - 1`` whose variables all have index ``<= a``."""
    idx = a - 1
    step = rhs.var_key(idx)
    for key, c in rhs.terms.items():
        exps = rhs.unpack(key)
        if _non_x_degree(exps) != stage - 1:
            continue
        if any(exps[idx + 1 :]):
            continue
        if rhs.key_degree(key) + 1 > rhs.cap:
            continue
        target[key + step] = c / (exps[idx] + 1)


def _add_terms(s: TSeries, extra: dict[int, Any]) -> TSeries:
    if not extra:
        return s
    return s + s.like(extra)


# ---------------------------------------------------------------------------
# dispersionless Lax operator


@dataclass
class LaxJet:
    r: int
    cap: int
    N: int
    symbol: Any
    dispersive: bool = False
    g_max: int = 0
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def space(self) -> VarSpace:
        return self.symbol.space

    def f(self, i: int) -> TSeries:
        """Coefficient of ``z^i`` (or ``D^i``)."""
        return self.symbol.coefficient(i)

    def fractional_power(self, n: int, depth: int) -> ZSymbol:
        key = ("pow", n, depth)
        if key not in self._cache:
            self._cache[key] = fractional_power(self.symbol, n, depth)
        return self._cache[key]

    def plus_power(self, n: int) -> ZSymbol:
        return split(self.fractional_power(n, 0))[0]

    def residue_power(self, n: int) -> TSeries:
        return residue(self.fractional_power(n, -1))

    def flow_rhs(self, a: int) -> ZSymbol:
        return poisson(self.plus_power(a), self.symbol)

    def v_values(self) -> list[TSeries]:
        """``v_i = res L^(i/r)`` on the jet, ``i = 1..r-1``."""
        if "v" not in self._cache:
            self._cache["v"] = [self.residue_power(i) for i in range(1, self.r)]
        return self._cache["v"]

    def to_text(self) -> str:
        return self.symbol.to_text()


def _L0_symbol(r: int, space: VarSpace, cap: int, fs: list[TSeries]) -> ZSymbol:
    coeffs = {r: TSeries.constant(space, cap, Fraction(1))}
    for i, s in enumerate(fs):
        coeffs[i] = s
    return ZSymbol(space, cap, coeffs)


def build_L0(r: int, cap: int, N: int, check: bool = True) -> LaxJet:
    """Jet of ``L0 = z^r + sum f_i z^i`` to total degree ``cap`` in ``T_1..T_N``."""
    if r < 2:
        raise BadIndexError("r must be at least 2")
    if N < r:
        raise BadIndexError(f"need N >= r, got N={N}, r={r}")
    if cap < 1:
        raise CapExceededError("degree cap must be at least 1", needed=1)
    space = VarSpace.T(N)
    fs = [TSeries.zero(space, cap) for _ in range(r - 1)]
    fs[0] = TSeries.var(space, cap, 0, Fraction(r))
    for stage in range(1, cap + 1):
        sym = _L0_symbol(r, space, cap, fs)
        new: list[dict[int, Any]] = [{} for _ in fs]
        for a in range(2, N + 1):
            if a % r == 0:
                continue
            rhs = poisson(split(fractional_power(sym, a, 0))[0], sym)
            for i in range(r - 1):
                _integrate_stage(new[i], rhs.coefficient(i), a, stage)
        fs = [_add_terms(s, extra) for s, extra in zip(fs, new)]
    jet = LaxJet(r, cap, N, _L0_symbol(r, space, cap, fs))
    if check:
        bad = check_flows_L0(jet)
        if bad is not None:
            raise InternalInconsistencyError(f"flow {bad} fails on the L0 jet")
    return jet


def check_flows_L0(jet: LaxJet, flows=None) -> int | None:
    """First flow index whose equation fails below the cap, or ``None``."""
    D = jet.cap - 1
    for a in flows or range(1, jet.N + 1):
        rhs = jet.flow_rhs(a)
        if _flow_mismatch(jet.symbol, rhs, a, D):
            return a
    return None


def _flow_mismatch(sym, rhs, a: int, D: int) -> bool:
    for i in set(sym.coeffs) | set(rhs.coeffs):
        lhs = sym.coefficient(i).derivative(a - 1).truncate(D)
        if lhs != rhs.coefficient(i).truncate(D):
            return True
    return False


# ---------------------------------------------------------------------------
# genus-zero wave function


@dataclass
class PhiJet:
    r: int
    cap: int
    N: int
    series: TSeries
    layers: list[TSeries] | None = None

    def layer(self, g: int) -> TSeries:
        if self.layers is None:
            if g:
                raise BadIndexError("dispersionless jet only has genus 0")
            return self.series
        return self.layers[g]


def build_phi0(r: int, cap: int, N: int, L0: LaxJet, check: bool = True) -> PhiJet:
    """Genus-zero ``phi0`` with ``d phi0/dT_n = (L0^(n/r))_+ at z = d phi0/dx``."""
    if L0.cap < cap - 1:
        raise CapExceededError(f"L0 jet has cap {L0.cap}, phi0 to degree {cap} needs {cap - 1}", needed=cap - 1)
    if L0.N < N:
        raise CapExceededError(f"L0 jet only covers T_1..T_{L0.N}", needed=N)
    space = VarSpace.T(N)
    sym = _restrict_symbol(L0.symbol, space, cap)
    plus = {a: split(fractional_power(sym, a, 0))[0] for a in range(2, N + 1)}
    phi = TSeries.zero(space, cap)
    for stage in range(1, cap + 1):
        phix = phi.derivative(0)
        new: dict[int, Any] = {}
        for a in range(2, N + 1):
            _integrate_stage(new, plus[a].evaluate(phix), a, stage)
        phi = _add_terms(phi, new)
    jet = PhiJet(r, cap, N, phi)
    if check:
        bad = check_flows_phi0(jet, sym)
        if bad is not None:
            raise InternalInconsistencyError(f"flow {bad} fails on the phi0 jet")
        if string_defect(phi, r, rT_r_layer=True):
            raise StringCheckFailedError("string equation fails on the phi0 jet")
    return jet


def _restrict_symbol(sym: ZSymbol, space: VarSpace, cap: int) -> ZSymbol:
    """Re-home a symbol's coefficients to ``space``/``cap`` (dropping extra variables)."""
    out = {}
    for e, c in sym.coeffs.items():
        out[e] = _restrict_series(c, space, cap)
    return ZSymbol(space, cap, out, sym.low)


def _restrict_series(c: TSeries, space: VarSpace, cap: int) -> TSeries:
    if c.space == space:
        return c.truncate(cap)
    n = space.count
    data = {}
    for exps, v in c.items():
        if any(exps[n:]):
            continue
        data[exps[:n]] = v
    return TSeries.from_dict(space, cap, data)


def check_flows_phi0(jet: PhiJet, sym: ZSymbol, flows=None) -> int | None:
    D = jet.cap - 1
    phi = jet.series
    phix = phi.derivative(0)
    for a in flows or range(1, jet.N + 1):
        rhs = split(fractional_power(sym, a, 0))[0].evaluate(phix)
        if phi.derivative(a - 1).truncate(D) != rhs.truncate(D):
            return a
    return None


def string_defect(phi: TSeries, r: int, rT_r_layer: bool = True) -> TSeries:
    """``(d/dT_1 - sum (i+r) T_(i+r) d/dT_i) phi - r T_r`` below the cap."""
    N = phi.space.count
    out = phi.derivative(0)
    for i in range(1, N - r + 1):
        out = out - (TSeries.var(phi.space, phi.cap, i + r - 1, Fraction(i + r)) * phi.derivative(i - 1))
    if rT_r_layer:
        out = out - TSeries.var(phi.space, phi.cap, r - 1, _unit_like(phi, r))
    return out.truncate(phi.cap - 1)


def _unit_like(s: TSeries, q):
    for c in s.terms.values():
        if isinstance(c, EpsScalar):
            return EpsScalar(c.lo, c.hi, {0: q})
        break
    return Fraction(q)


# ---------------------------------------------------------------------------
# v-coordinates and the closed potential


@dataclass
class VCoords:
    r: int
    cap: int
    forward: list[TSeries]
    backward: list[TSeries]
    residues: dict[int, TSeries] = field(default_factory=dict)
    f_symbol: ZSymbol | None = None

    def residue_poly(self, n: int) -> TSeries:
        """``res L^(n/r)`` as a polynomial in ``f_0..f_(r-2)``."""
        if n not in self.residues:
            if (n + 1) // 2 > self.cap:
                raise CapExceededError(f"f-polynomial cap {self.cap} too small for n={n}", needed=(n + 1) // 2)
            self.residues[n] = residue(fractional_power(self.f_symbol, n, -1))
        return self.residues[n]

    def to_v(self, p: TSeries) -> TSeries:
        """Rewrite an f-polynomial in v-coordinates."""
        if not p:
            return TSeries.zero(self.backward[0].space, self.cap)
        return substitute_series(p, dict(enumerate(self.backward)))

    def round_trip(self) -> bool:
        vs = self.backward[0].space
        return all(
            substitute_series(self.forward[i - 1], dict(enumerate(self.backward)))
            == TSeries.var(vs, self.cap, i - 1)
            for i in range(1, self.r)
        )


def v_coords(r: int, max_n: int = 0) -> VCoords:
    """Polynomial maps between ``f_0..f_(r-2)`` and ``v_1..v_(r-1)``.

    ``max_n`` is the largest ``n`` for which ``res L^(n/r)`` will be requested.
    Every such residue is weighted-homogeneous of weight ``n + 1`` with all
    weights ``>= 2``, which bounds the polynomial degree.
    """
    cap = max((max(max_n, r) + 1) // 2 + 1, 2)
    fs = VarSpace.f(r)
    coeffs = {r: TSeries.constant(fs, cap, Fraction(1))}
    for i in range(r - 1):
        coeffs[i] = TSeries.var(fs, cap, i)
    sym = ZSymbol(fs, cap, coeffs)
    forward = [residue(fractional_power(sym, i, -1)) for i in range(1, r)]
    vs = VarSpace.v(r - 1)
    backward: list[TSeries | None] = [None] * (r - 1)
    # v_i = (i/r) f_(r-1-i) + (terms in f_j, j > r-1-i)
    for i in range(1, r):
        j = r - 1 - i
        lead = forward[i - 1].coefficient(tuple(1 if k == j else 0 for k in range(r - 1)))
        if lead != Fraction(i, r):
            raise InternalInconsistencyError(f"v_{i} is not triangular in f_{j}")
        rest = forward[i - 1] - TSeries.var(fs, cap, j, Fraction(i, r))
        sub = {k: backward[k] for k in range(j + 1, r - 1)}
        rest_v = substitute_series(rest, sub) if rest else TSeries.zero(vs, cap)
        if rest and rest_v.space != vs:
            rest_v = TSeries.zero(vs, cap) + rest_v
        backward[j] = (TSeries.var(vs, cap, i - 1) - rest_v).scale(Fraction(r, i))
    return VCoords(r, cap, forward, backward, {i: forward[i - 1] for i in range(1, r)}, sym)


def two_point_closed(a: int, b: int, L0: LaxJet, V: VCoords, cap: int | None = None) -> TSeries:
    """``d^2 F / dT_a dT_b`` for ``1 <= b <= r-1`` from the residue of ``L0^((a+r)/r)``."""
    r = L0.r
    if not 1 <= b <= r - 1:
        raise BadIndexError(f"b must lie in 1..{r - 1}, got {b}")
    if a < 1:
        raise BadIndexError(f"a must be positive, got {a}")
    cap = L0.cap if cap is None else cap
    if cap > L0.cap:
        raise CapExceededError(f"two-point series to degree {cap} needs an L0 jet of that cap", needed=cap)
    space = L0.space
    key = ("tp", a, b, cap)
    if key in L0._cache:
        return L0._cache[key]
    if a % r == 0:
        out = TSeries.zero(space, cap)
    else:
        q = V.to_v(V.residue_poly(a + r))
        dq = q.derivative(r - b - 1) if q else q
        if not dq:
            out = TSeries.zero(space, cap)
        else:
            vals = [v.truncate(cap) for v in L0.v_values()]
            out = substitute_series(dq, dict(enumerate(vals))).scale(Fraction(b * (r - b), a + r))
    L0._cache[key] = out
    return out


def assemble_F0_closed(r: int, cap: int, N: int, L0: LaxJet, V: VCoords) -> TSeries:
    """Closed genus-zero potential in ``T_1..T_N`` to total degree ``cap``."""
    if L0.cap < cap - 2:
        raise CapExceededError(f"F to degree {cap} needs L0 to degree {cap - 2}", needed=cap - 2)
    space = L0.space
    tcap = cap - 2
    pairs = [(a, b) for b in range(1, r) for a in range(1, N + 1)]
    tp = {p: two_point_closed(p[0], p[1], L0, V, tcap) for p in pairs}
    monos: set[tuple[int, ...]] = set()
    for (a, b), s in tp.items():
        for exps, _ in s.items():
            m = list(exps)
            m[a - 1] += 1
            m[b - 1] += 1
            if sum(m) >= 3:
                monos.add(tuple(m))

    def value(m: tuple[int, ...], a: int, b: int) -> Fraction:
        k = list(m)
        k[a - 1] -= 1
        k[b - 1] -= 1
        c = tp[(a, b)].coefficient(tuple(k))
        mult = m[a - 1] * (m[a - 1] - 1) if a == b else m[a - 1] * m[b - 1]
        return Fraction(c) / mult

    def choices(m):
        for b in range(1, r):
            if not m[b - 1]:
                continue
            for a in range(1, N + 1):
                if m[a - 1] - (a == b) > 0:
                    yield a, b

    data = {}
    for m in monos:
        ch = choices(m)
        a, b = next(ch)
        c = value(m, a, b)
        alt = next(ch, None)
        if alt is not None and value(m, *alt) != c:
            raise InconsistentError(f"monomial {m}: pairs {(a, b)} and {alt} disagree")
        if c:
            data[m] = c
    return TSeries.from_dict(space, cap, data)


# ---------------------------------------------------------------------------
# dispersive hierarchy


def _eps_window(g_max: int) -> tuple[int, int]:
    return 0, g_max + 1


def _eps_one(lo: int, hi: int, q=1) -> EpsScalar:
    return EpsScalar(lo, hi, {0: q})


def _clip(c: EpsScalar, top: int) -> EpsScalar:
    return EpsScalar(c.lo, c.hi, {e: v for e, v in c.coeffs.items() if e <= top})


def trim_layers(s: TSeries, cap: int) -> TSeries:
    """Drop the ``eps^g`` part of every monomial of degree above ``cap - g``.

    Each ``d/dx`` comes with one power of ``eps`` and lowers the degree by one,
    so the ``eps^g`` layer of a dispersive jet is only exact up to ``cap - g``.
    """
    out = {}
    for k, c in s.terms.items():
        if isinstance(c, EpsScalar):
            room = cap - s.key_degree(k)
            c = EpsScalar(c.lo, c.hi, {e: v for e, v in c.coeffs.items() if e <= room})
        elif s.key_degree(k) > cap:
            continue
        out[k] = c
    return s.like(out)


def _rewindow(c: EpsScalar, lo: int, hi: int) -> EpsScalar:
    return EpsScalar(lo, hi, {e: v for e, v in c.coeffs.items() if e <= hi})


def _dispersive_op(r: int, space: VarSpace, cap: int, Fs: list[TSeries], lo: int, hi: int) -> PDOp:
    one = _eps_one(lo, hi)
    coeffs = {r: TSeries.constant(space, cap, one)}
    for i, s in enumerate(Fs):
        coeffs[i] = s
    return PDOp(space, cap, coeffs, None, EpsScalar.eps(lo, hi, 1), one)


def build_L_dispersive(r: int, cap: int, N: int, g_max: int = 1, check: bool = True) -> LaxJet:
    """Jet of the dispersive Lax operator.

    Stored in the rescaled form ``L = eps^-r (D^r + sum F_i D^i)`` with
    ``D = eps d/dx``, so that ``F_i = eps^(r-i) f_i`` only carries the
    exponents ``0..g_max``; the flows read ``dL/dT_n = eps^-1 [(L^(n/r))_+, L]``
    in this normalization.
    """
    if N < r:
        raise BadIndexError(f"need N >= r, got N={N}, r={r}")
    lo, hi = _eps_window(g_max)
    space = VarSpace.T(N)
    Fs = [TSeries.zero(space, cap) for _ in range(r - 1)]
    Fs[0] = TSeries.var(space, cap, 0, _eps_one(lo, hi, r))
    flows = [a for a in range(2, N + 1) if a % r]
    for stage in range(1, cap + 1):
        op = _dispersive_op(r, space, cap, Fs, lo, hi)
        new: list[dict[int, Any]] = [{} for _ in Fs]
        if flows:
            root = rth_root(op, 1 - max(flows))
        for a in flows:
            rhs = _dispersive_rhs(op, root, a, r, g_max)
            for i in range(r - 1):
                _integrate_stage(new[i], rhs.coefficient(i), a, stage)
        Fs = [trim_layers(_add_terms(s, extra), cap) for s, extra in zip(Fs, new)]
    jet = LaxJet(r, cap, N, _dispersive_op(r, space, cap, Fs, lo, hi), dispersive=True, g_max=g_max)
    if check:
        bad = check_flows_dispersive(jet)
        if bad is not None:
            raise InternalInconsistencyError(f"flow {bad} fails on the dispersive jet")
    return jet


def _dispersive_rhs(op: PDOp, root: PDOp, a: int, r: int, g_max: int) -> PDOp:
    plus = plus_part(power(root._like(root.coeffs, 1 - a), a, 0))
    comm = commutator(plus, op)

    def shift(c: TSeries) -> TSeries:
        try:
            return c.map_coeffs(lambda e: _clip(e.shift(-1), g_max))
        except EpsWindowError as exc:
            raise EpsWindowError(f"flow {a}: commutator has an eps^0 term ({exc})") from None

    return comm.map_series(shift)


def check_flows_dispersive(jet: LaxJet, flows=None) -> int | None:
    r, op = jet.r, jet.symbol
    D = jet.cap - 1
    flows = list(flows or range(1, jet.N + 1))
    root = rth_root(op, 1 - max(flows))
    for a in flows:
        rhs = _dispersive_rhs(op, root, a, r, jet.g_max)
        for i in set(op.coeffs) | set(rhs.coeffs):
            lhs = trim_layers(op.coefficient(i).derivative(a - 1), D)
            if lhs != trim_layers(rhs.coefficient(i), D):
                return a
    return None


def dispersive_layer(jet: LaxJet, i: int, g: int) -> TSeries:
    """Rational series ``f_i^[g]``, the ``eps^g`` part of ``F_i``."""
    if not 0 <= g <= jet.g_max:
        raise CapExceededError(f"eps^{g} layer requested, jet carries 0..{jet.g_max}", needed=g)
    c = jet.symbol.coefficient(i)
    space = VarSpace.T(jet.N)
    data = {}
    for exps, v in c.items():
        q = v.layer(g)
        if q:
            data[exps] = q
    return TSeries.from_dict(space, jet.cap, data)


def dispersive_text(jet: LaxJet) -> str:
    """The operator in ``d/dx`` form: ``Dx^r + sum eps^(i-r) F_i Dx^i``."""
    r = jet.r
    op = jet.symbol
    lo, hi = -r, jet.g_max
    one = _eps_one(lo, hi)
    coeffs = {r: TSeries.constant(op.space, op.cap, one)}
    for i in range(r - 1):
        c = op.coefficient(i)
        coeffs[i] = c.map_coeffs(
            lambda e, i=i: EpsScalar(lo, hi, {k + i - r: v for k, v in e.coeffs.items() if k <= jet.g_max})
        )
    return PDOp(op.space, op.cap, coeffs, None, Fraction(1), one).to_text()


def _partitions(n: int, max_part: int | None = None):
    if n == 0:
        yield []
        return
    max_part = n if max_part is None else max_part
    for p in range(min(n, max_part), 0, -1):
        for rest in _partitions(n - p, p):
            yield [p] + rest


def faa_di_bruno(i: int, ys: list[TSeries], unit=Fraction(1)) -> TSeries:
    """Complete Bell polynomial ``B_i(y_1, ..., y_i)``; ``ys[j-1] = y_j``.

    With ``y_j = eps^j d^j phi`` this is ``eps^i d^i e^phi / e^phi``.
    """
    one = TSeries.constant(ys[0].space, ys[0].cap, unit)
    if i == 0:
        return one
    total = None
    for part in _partitions(i):
        counts: dict[int, int] = {}
        for p in part:
            counts[p] = counts.get(p, 0) + 1
        coef = Fraction(factorial(i))
        term = one
        for j, m in counts.items():
            coef /= factorial(j) ** m * factorial(m)
            term = term * (ys[j - 1] ** m)
        term = term.scale(coef)
        total = term if total is None else total + term
    return total


def bell_by_recursion(n: int, psi: TSeries, eps, unit=Fraction(1)) -> list[TSeries]:
    """``E_0..E_n`` from ``E_(i+1) = eps dE_i/dx + psi_x E_i``; an independent oracle."""
    one = TSeries.constant(psi.space, psi.cap, unit)
    psix = psi.derivative(0)
    out = [one]
    for _ in range(n):
        e = out[-1]
        out.append(e.derivative(0).scale(eps) + psix * e)
    return out


def _y_values(psi: TSeries, n: int, eps) -> list[TSeries]:
    ys = []
    d = psi
    eps_pow = None
    for j in range(1, n + 1):
        d = d.derivative(0)
        ys.append(d if eps_pow is None else d.scale(eps_pow))
        eps_pow = eps if eps_pow is None else eps_pow * eps
    return ys


def build_phi_dispersive(r: int, cap: int, N: int, g_max: int, L: LaxJet, check: bool = True) -> PhiJet:
    """``psi = eps * phi`` with ``d psi/dT_n = sum_i R_i E_i`` where
    ``(L^(n/r))_+ = eps^-n sum R_i D^i`` and ``E_i = eps^i d^i e^phi / e^phi``."""
    if not L.dispersive:
        raise BadIndexError("needs a dispersive Lax jet")
    if L.cap < cap - 1:
        raise CapExceededError(f"Lax jet cap {L.cap} too small for phi to degree {cap}", needed=cap - 1)
    if L.g_max < g_max:
        raise CapExceededError(f"Lax jet carries genus <= {L.g_max}", needed=g_max)
    lo, hi = 0, g_max
    space = VarSpace.T(N)
    opL = L.symbol

    def conv(c: TSeries) -> TSeries:
        return _restrict_series(c, space, cap).map_coeffs(lambda e: _rewindow(e, lo, hi))

    root = rth_root(opL, 1 - N)
    plus: dict[int, dict[int, TSeries]] = {}
    for a in range(2, N + 1):
        p = plus_part(power(root._like(root.coeffs, 1 - a), a, 0))
        plus[a] = {i: conv(c) for i, c in p.coeffs.items()}
    eps = EpsScalar.eps(lo, hi, 1)
    psi = TSeries.zero(space, cap)
    try:
        for stage in range(1, cap + 1):
            ys = _y_values(psi, N, eps)
            E = [faa_di_bruno(i, ys, _eps_one(lo, hi)) for i in range(N + 1)]
            new: dict[int, Any] = {}
            for a in range(2, N + 1):
                rhs = TSeries.zero(space, cap)
                for i, R in plus[a].items():
                    rhs = rhs + R * E[i]
                _integrate_stage(new, rhs, a, stage)
            psi = trim_layers(_add_terms(psi, new), cap)
    except EpsWindowError as exc:
        raise GenusLeakError(f"negative genus term in phi: {exc}") from None
    layers = []
    for g in range(g_max + 1):
        data = {}
        for exps, v in psi.items():
            q = v.layer(g)
            if q:
                data[exps] = q
        layers.append(TSeries.from_dict(space, cap, data))
    jet = PhiJet(r, cap, N, psi, layers)
    if check and trim_layers(string_defect(psi, r, rT_r_layer=True), cap - 1):
        raise StringCheckFailedError("string equation fails on the dispersive phi jet")
    return jet
