"""Correlators in t-variables, computed two ways.

The hierarchy side converts the wave-function jet ``phi0`` into the extended
potential by a diagonal rescaling in the ring ``R_r``. The recursion side
rebuilds every extended correlator from the dimension constraint, the
topological recursion, the values ``X_a`` and the primary recursion, using
closed correlators read from the hierarchy's closed potential.

Insertions are pairs ``(twist, descendent)``. Extended keys list only the
ordinary insertions; the single twist ``-1`` point is implicit and primary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb, factorial
from typing import Iterable, Iterator, Sequence

from .errors import (
    CapExceededError,
    MalformedKeyError,
    TwoMinusOneInsertionsError,
    UnmappedVariableError,
)
from .hierarchy import (
    LaxJet,
    PhiJet,
    VCoords,
    assemble_F0_closed,
    build_L0,
    build_phi0,
    v_coords,
)
from .scalar import Scalar, as_rational, lambda_pow
from .series import TSeries, VarSpace, monomial_text, substitute_linear

__all__ = [
    "CorrelatorKey",
    "ChangeOfVars",
    "CorrelatorTable",
    "Engine",
    "CrosscheckReport",
    "to_t_variables",
    "extract_correlator",
    "extended_from_phi0",
    "open_potential",
    "closed_dimension_ok",
    "extended_dimension_ok",
    "open_dimension_ok",
    "x_value",
]

SECTORS = ("closed", "extended", "open")
Insertion = tuple[int, int]


# ---------------------------------------------------------------------------
# keys


@dataclass(frozen=True)
class CorrelatorKey:
    r: int
    sector: str
    insertions: tuple[Insertion, ...]
    boundary: int = 0

    def __post_init__(self):
        if self.sector not in SECTORS:
            raise MalformedKeyError(f"unknown sector {self.sector!r}")
        if self.r < 2:
            raise MalformedKeyError(f"r must be at least 2, got {self.r}")
        ins = []
        minus_ones = 0
        for item in self.insertions:
            try:
                a, d = (int(x) for x in item)
            except (TypeError, ValueError):
                raise MalformedKeyError(f"insertion {item!r} is not a (twist, descendent) pair") from None
            if a == -1:
                minus_ones += 1
                continue
            if not 0 <= a <= self.r - 1:
                raise MalformedKeyError(f"twist {a} outside 0..{self.r - 1}")
            if d < 0:
                raise MalformedKeyError(f"negative descendent {d}")
            ins.append((a, d))
        if minus_ones:
            if self.sector != "extended":
                raise MalformedKeyError(f"twist -1 is not allowed in the {self.sector} sector")
            raise TwoMinusOneInsertionsError("extended keys carry one implicit twist -1 point")
        if self.boundary < 0:
            raise MalformedKeyError("boundary count must be nonnegative")
        if self.boundary and self.sector != "open":
            raise MalformedKeyError("boundary points only exist in the open sector")
        object.__setattr__(self, "insertions", tuple(sorted(ins)))

    @property
    def n(self) -> int:
        return len(self.insertions)

    @property
    def max_descendent(self) -> int:
        return max((d for _, d in self.insertions), default=0)

    @property
    def total_descendent(self) -> int:
        return sum(d for _, d in self.insertions)

    def text(self) -> str:
        parts = ["tau^-1_0"] if self.sector == "extended" else []
        parts += [f"tau^{a}_{d}" for a, d in self.insertions]
        if self.boundary:
            parts.append(f"sigma^{self.boundary}")
        return "<" + " ".join(parts) + ">"


def t_index(r: int, a: int, d: int) -> int:
    """0-based position of ``t^a_d`` (equivalently of ``T_(a+1+rd)``)."""
    return a + r * d


def x_value(r: int, a: int) -> Fraction:
    return Fraction((-1) ** a * factorial(a), r**a)


def closed_dimension_ok(r: int, ins: Sequence[Insertion]) -> bool:
    n = len(ins)
    if n < 3:
        return False
    s = sum(a for a, _ in ins) - (r - 2)
    if s < 0 or s % r:
        return False
    return s // r + sum(d for _, d in ins) == n - 3


def extended_dimension_ok(r: int, ins: Sequence[Insertion]) -> bool:
    n = len(ins)
    if n < 2:
        return False
    s = sum(a for a, _ in ins) - (r - 1)
    if s < 0 or s % r:
        return False
    return s // r + sum(d for _, d in ins) == n - 2


def open_dimension_ok(r: int, ins: Sequence[Insertion], m: int) -> bool:
    n = len(ins)
    if 2 * n + m - 3 < 0:
        return False
    s = (m - 1) * (r - 2) + 2 * sum(a for a, _ in ins)
    if s < 0 or s % r:
        return False
    e = s // r
    if (e - (1 + m)) % 2:
        return False
    return e + 2 * sum(d for _, d in ins) == 2 * n + m - 3


# ---------------------------------------------------------------------------
# change of variables


@dataclass(frozen=True)
class ChangeOfVars:
    """``T_k = q_k * L^(e_k) * t_k`` for ``k = 1..N``; every factor is a unit of ``R_r``.

    Non-Ramond ``k = a+1+rd``: ``T_k = t^a_d / (L^(3k-(r+1)-2d(r+1)) k!_r)``.
    Ramond ``k = mr``: ``T_k = t^(r-1)_(m-1) / (L^(m(r-2)) m! r^m)``.
    """

    r: int
    N: int

    def factor(self, k: int) -> tuple[Fraction, int]:
        if not 1 <= k <= self.N:
            raise UnmappedVariableError(f"T_{k} is outside T_1..T_{self.N}")
        r = self.r
        if k % r == 0:
            m = k // r
            return Fraction(1, factorial(m) * r**m), -m * (r - 2)
        a, d = (k - 1) % r, (k - 1) // r
        kfact = 1
        for i in range(d + 1):
            kfact *= a + 1 + r * i
        return Fraction(1, kfact), -(3 * k - (r + 1) - 2 * d * (r + 1))

    def scale(self, k: int) -> Scalar:
        q, e = self.factor(k)
        return lambda_pow(self.r, e) * q

    def t_space(self, extra: Sequence[str] = ()) -> VarSpace:
        return VarSpace.t(self.r, self.N, extra)


def _diagonal(F: TSeries, factors, overall: tuple[Fraction, int]):
    """Rescale ``x_k -> q_k L^e_k y_k``; returns ``{exps: (rational, L-exponent)}``."""
    out = {}
    for exps, c in F.items():
        q, e = overall
        q = q * c
        for k, m in enumerate(exps):
            if m:
                fq, fe = factors[k]
                q *= fq**m
                e += fe * m
        out[exps] = (q, e)
    return out


def to_t_variables(F: TSeries, cov: ChangeOfVars) -> TSeries:
    """Rewrite a series in ``T_1..T_N`` in t-variables; coefficients become Scalars."""
    if F.space.count > cov.N:
        raise UnmappedVariableError(f"series has {F.space.count} variables, change covers {cov.N}")
    target = VarSpace.t(cov.r, F.space.count)
    factors = [cov.factor(k) for k in range(1, F.space.count + 1)]
    data = {}
    for exps, c in F.items():
        q, e = Fraction(1), 0
        for k, m in enumerate(exps):
            if m:
                q *= factors[k][0] ** m
                e += factors[k][1] * m
        data[exps] = lambda_pow(cov.r, e) * q * c
    return TSeries.from_dict(target, F.cap, data)


def to_T_variables(G: TSeries, cov: ChangeOfVars) -> TSeries:
    """Inverse of :func:`to_t_variables`."""
    target = VarSpace.T(G.space.count)
    data = {}
    for exps, c in G.items():
        val = c if isinstance(c, Scalar) else Scalar.rational(cov.r, c)
        for k, m in enumerate(exps):
            if m:
                val = val * (cov.scale(k + 1) ** (-m))
        data[exps] = val
    return TSeries.from_dict(target, G.cap, data)


def rationalize(G: TSeries) -> TSeries:
    """Scalar coefficients to Fractions; raises ``NotRationalError`` otherwise."""
    return G.like({k: as_rational(c) for k, c in G.terms.items()})


def extract_correlator(F: TSeries, key: CorrelatorKey):
    """Coefficient of the key's monomial times the product of multiplicity factorials."""
    r = key.r
    exps = [0] * F.space.count
    for a, d in key.insertions:
        idx = t_index(r, a, d)
        if idx >= (F.space.count - (1 if key.sector == "open" else 0)):
            raise CapExceededError(
                f"t^{a}_{d} is beyond the {F.space.count} variables of the potential", needed=idx + 1
            )
        exps[idx] += 1
    if key.sector == "open":
        exps[-1] += key.boundary
    if sum(exps) > F.cap:
        raise CapExceededError(f"{key.text()} needs degree {sum(exps)}, potential has cap {F.cap}", needed=sum(exps))
    c = F.coefficient(tuple(exps))
    mult = 1
    for m in exps:
        mult *= factorial(m)
    return c * mult


def extended_from_phi0(phi0: PhiJet | TSeries, cov: ChangeOfVars) -> TSeries:
    """``F_ext(t) = sqrt(-r) phi0(t^(<=r-2), t^(r-1) / sqrt(-r))`` with rational coefficients."""
    phi = phi0.series if isinstance(phi0, PhiJet) else phi0
    r = cov.r
    N = phi.space.count
    factors = []
    for k in range(1, N + 1):
        q, e = cov.factor(k)
        if k % r == 0:
            e -= r + 1
        factors.append((q, e))
    target = VarSpace.t(r, N)
    data = {}
    for exps, (q, e) in _diagonal(phi, factors, (Fraction(1), r + 1)).items():
        data[exps] = as_rational(lambda_pow(r, e) * q)
    return TSeries.from_dict(target, phi.cap, data)


def open_potential(F_ext: TSeries, r: int) -> TSeries:
    """``F_o = -(1/r) F_ext|_(t^(r-1)_0 -> t^(r-1)_0 - r s) + (1/r) F_ext`` in t-variables plus ``s``."""
    names = F_ext.space.names
    if F_ext.space.labels is None:
        raise UnmappedVariableError("open potential needs a labelled t-space")
    N = sum(1 for lab in F_ext.space.labels if lab[0] is not None)
    target = VarSpace.t(r, N, ("s",))
    if len(names) != N:
        raise UnmappedVariableError("input already carries extra variables")
    ramond0 = target.label_index((r - 1, 0)) if r - 1 < N else None
    s_idx = target.index("s")
    mapping = {} if ramond0 is None else {ramond0: (Fraction(1), s_idx, Fraction(-r))}
    shifted = substitute_linear(F_ext, mapping, target)
    plain = substitute_linear(F_ext, {}, target)
    return (plain - shifted).scale(Fraction(1, r))


# ---------------------------------------------------------------------------
# table and engine


@dataclass
class CorrelatorTable:
    memo: dict[CorrelatorKey, Scalar] = field(default_factory=dict)
    provenance: dict[CorrelatorKey, str] = field(default_factory=dict)
    poisoned: list[CorrelatorKey] = field(default_factory=list)

    def record(self, key: CorrelatorKey, value, source: str) -> None:
        val = value if isinstance(value, Scalar) else Scalar.rational(key.r, value)
        if key in self.memo:
            prev = self.provenance[key]
            if self.memo[key] != val:
                self.poisoned.append(key)
                self.provenance[key] = "mismatch"
                return
            if prev != source and prev != "mismatch":
                self.provenance[key] = "both-agree"
            return
        self.memo[key] = val
        self.provenance[key] = source

    def value(self, key: CorrelatorKey) -> Scalar:
        return self.memo[key]


def multisets(r: int, max_n: int, max_total_d: int, min_n: int = 0) -> Iterator[tuple[Insertion, ...]]:
    """All sorted insertion tuples with ``min_n <= n <= max_n`` and ``sum d <= max_total_d``."""
    labels = [(a, d) for d in range(max_total_d + 1) for a in range(r)]
    labels.sort()

    def rec(start: int, left_n: int, left_d: int, acc: list[Insertion]):
        if len(acc) >= min_n:
            yield tuple(acc)
        if left_n == 0:
            return
        for i in range(start, len(labels)):
            a, d = labels[i]
            if d > left_d:
                continue
            acc.append((a, d))
            yield from rec(i, left_n - 1, left_d - d, acc)
            acc.pop()

    yield from rec(0, max_n, max_total_d, [])


def _split_subsets(items: Sequence[Insertion], fixed_right: Sequence[Insertion] = ()) -> Iterator[tuple[list, list]]:
    """All ``I, J`` with ``I + J = items`` as position-labelled subsets."""
    n = len(items)
    for mask in range(1 << n):
        I = [items[p] for p in range(n) if mask >> p & 1]
        J = [items[p] for p in range(n) if not mask >> p & 1]
        yield I, J + list(fixed_right)


class Engine:
    """Both pipelines for one ``r`` at fixed caps.

    ``max_n`` bounds the number of ordinary insertions of extended keys and
    ``max_d`` the total descendent depth. Hierarchy jets are built on first use.
    """

    def __init__(self, r: int, max_n: int = 6, max_d: int = 2):
        if r < 2:
            raise MalformedKeyError("r must be at least 2")
        self.r = r
        self.max_n = max_n
        self.max_d = max_d
        self.N = r * (max_d + 1)
        self.cov = ChangeOfVars(r, self.N)
        self.table = CorrelatorTable()
        self._ext_memo: dict[tuple[Insertion, ...], Fraction] = {}
        self._L0: LaxJet | None = None
        self._phi0: PhiJet | None = None
        self._V: VCoords | None = None
        self._F0c_T: TSeries | None = None
        self._F0c: TSeries | None = None
        self._Fext: TSeries | None = None
        self._Fopen: TSeries | None = None

    # -- hierarchy side ------------------------------------------------------
    @property
    def L0(self) -> LaxJet:
        if self._L0 is None:
            self._L0 = build_L0(self.r, max(self.max_n - 1, 1), self.N)
        return self._L0

    @property
    def phi0(self) -> PhiJet:
        if self._phi0 is None:
            self._phi0 = build_phi0(self.r, self.max_n, self.N, self.L0)
        return self._phi0

    @property
    def V(self) -> VCoords:
        if self._V is None:
            self._V = v_coords(self.r, self.N + self.r)
        return self._V

    @property
    def F0_closed_T(self) -> TSeries:
        if self._F0c_T is None:
            self._F0c_T = assemble_F0_closed(self.r, max(self.max_n, 3), self.N, self.L0, self.V)
        return self._F0c_T

    @property
    def F0_closed(self) -> TSeries:
        """Closed potential in t-variables (rational)."""
        if self._F0c is None:
            self._F0c = rationalize(to_t_variables(self.F0_closed_T, self.cov))
        return self._F0c

    @property
    def F_ext(self) -> TSeries:
        if self._Fext is None:
            self._Fext = extended_from_phi0(self.phi0, self.cov)
        return self._Fext

    @property
    def F_open(self) -> TSeries:
        if self._Fopen is None:
            self._Fopen = open_potential(self.F_ext, self.r)
        return self._Fopen

    def _check_range(self, ins: Sequence[Insertion], n_extra: int = 0) -> None:
        for a, d in ins:
            if t_index(self.r, a, d) >= self.N:
                raise CapExceededError(
                    f"descendent {d} needs max_d >= {d}", needed=d
                )
        if len(ins) + n_extra > self.max_n:
            raise CapExceededError(
                f"{len(ins) + n_extra} insertions exceed max_n={self.max_n}", needed=len(ins) + n_extra
            )

    def hierarchy_extended(self, ins: Sequence[Insertion]) -> Fraction:
        key = CorrelatorKey(self.r, "extended", tuple(ins))
        self._check_range(key.insertions)
        if len(key.insertions) < 2:
            return Fraction(0)
        v = Fraction(extract_correlator(self.F_ext, key))
        self.table.record(key, v, "hierarchy")
        return v

    def closed(self, ins: Sequence[Insertion]) -> Fraction:
        """Closed correlator: Ramond vanishing and dimension gates, then the closed potential."""
        ins = tuple(sorted(ins))
        r = self.r
        if any(a == r - 1 for a, _ in ins):
            return Fraction(0)
        if not closed_dimension_ok(r, ins):
            return Fraction(0)
        key = CorrelatorKey(r, "closed", ins)
        if len(ins) > self.F0_closed.cap:
            raise CapExceededError(f"closed {key.text()} beyond cap {self.F0_closed.cap}", needed=len(ins))
        v = Fraction(extract_correlator(self.F0_closed, key))
        self.table.record(key, v, "hierarchy")
        return v

    def open(self, ins: Sequence[Insertion], m: int) -> Fraction:
        key = CorrelatorKey(self.r, "open", tuple(ins), m)
        self._check_range(key.insertions, m)
        return Fraction(extract_correlator(self.F_open, key))

    # -- recursion side ------------------------------------------------------
    def extended(self, ins: Iterable[Insertion]) -> Fraction:
        """Extended correlator ``<tau^-1_0 prod tau^a_d>`` from the geometric recursions."""
        ins = tuple(sorted(tuple(x) for x in ins))
        if ins in self._ext_memo:
            return self._ext_memo[ins]
        key = CorrelatorKey(self.r, "extended", ins)
        v = self._extended(key.insertions)
        self._ext_memo[ins] = v
        return v

    def _extended(self, ins: tuple[Insertion, ...]) -> Fraction:
        r = self.r
        if not extended_dimension_ok(r, ins):
            return Fraction(0)
        if any(d for _, d in ins):
            return self.trr_general(ins)
        ns = [a for a, _ in ins if a != r - 1]
        if len(ns) <= 1:
            return x_value(r, ns[0] if ns else r - 1)
        return self._primary(tuple(sorted(ns)), len(ins) - len(ns))

    def trr_general(self, ins: Sequence[Insertion], i: int | None = None, k: int | None = None) -> Fraction:
        """Right side of the general TRR with the descendent at position ``i``,
        ``j`` the twist ``-1`` point and ``k`` another ordinary insertion."""
        ins = list(ins)
        r = self.r
        if i is None:
            top = max(d for _, d in ins)
            i = next(p for p, (_, d) in enumerate(ins) if d == top)
        ai, di = ins[i]
        if di == 0:
            raise MalformedKeyError("TRR needs a descendent at the chosen point")
        rest_pos = [p for p in range(len(ins)) if p != i]
        if k is None:
            k = rest_pos[0]
        if k == i or k not in rest_pos:
            raise MalformedKeyError("k must be another insertion")
        others = [ins[p] for p in rest_pos if p != k]
        lowered = (ai, di - 1)
        total = Fraction(0)
        for I, J in _split_subsets(others, [ins[k]]):
            # twist -1 at the node: both factors extended
            left = self.extended([lowered] + I)
            if left:
                total += left * self.extended([(r - 1, 0)] + J)
            # closed left factor; twist r-1 at the node vanishes by Ramond vanishing
            for alpha in range(r - 1):
                left = self.closed([(alpha, 0), lowered] + I)
                if left:
                    total += left * self.extended([(r - 2 - alpha, 0)] + J)
        return total

    def _primary(self, ns: tuple[int, ...], k: int) -> Fraction:
        """Primary recursion for ``l >= 2`` non-Ramond twists ``ns`` and ``k`` Ramond points."""
        r = self.r
        l = len(ns)
        positions = range(l)

        def A(I: Sequence[int]) -> Fraction:
            twists = [ns[p] for p in I]
            m = r + 1 - sum(r - a for a in twists)
            if m < 0:
                return Fraction(0)
            return self.extended([(a, 0) for a in twists] + [(r - 1, 0)] * m)

        def m_of(I: Sequence[int]) -> int:
            return r + 1 - sum(r - ns[p] for p in I)

        def binom(n: int, j: int) -> int:
            return comb(n, j) if 0 <= j <= n else 0

        first, last = 0, l - 1
        middle = [p for p in positions if p not in (first, last)]
        rhs = Fraction(0)
        for size in range(len(middle) + 1):
            for sub in combinations(middle, size):
                rest = [p for p in middle if p not in sub]
                # 1 in I, l in J
                I = [first, *sub]
                J = [*rest, last]
                c = binom(r + k - 1, m_of(I) - 1)
                if c:
                    rhs += c * A(I) * A(J)
                # 1, l in I, J nonempty
                if rest:
                    I2 = [first, *sub, last]
                    c = binom(r + k - 1, m_of(I2))
                    if c:
                        rhs -= c * A(I2) * A(rest)
        lead = Fraction((-1) ** (r - 1) * factorial(r + k - 1), factorial(k) * r ** (r - 1))
        return rhs / lead

    def reconstruct(self, ins: Sequence[Insertion]) -> Fraction:
        v = self.extended(ins)
        self.table.record(CorrelatorKey(self.r, "extended", tuple(ins)), v, "recursion")
        return v

    # -- enumeration -----------------------------------------------------------
    def extended_keys(self, max_n: int | None = None, max_d: int | None = None) -> list[tuple[Insertion, ...]]:
        max_n = self.max_n if max_n is None else max_n
        max_d = self.max_d if max_d is None else max_d
        return sorted(multisets(self.r, max_n, max_d, 2), key=lambda t: (len(t), t))

    def crosscheck(self, max_n: int | None = None, max_d: int | None = None) -> "CrosscheckReport":
        rows = []
        for ins in self.extended_keys(max_n, max_d):
            rec = self.reconstruct(ins)
            hie = self.hierarchy_extended(ins)
            rows.append((ins, rec, hie))
        lax_ok, lax_bad = lax_identity(self)
        return CrosscheckReport(self.r, rows, lax_ok, lax_bad)


@dataclass
class CrosscheckReport:
    r: int
    rows: list[tuple[tuple[Insertion, ...], Fraction, Fraction]]
    lax_ok: bool
    lax_first_bad: tuple | None = None

    @property
    def mismatches(self) -> list[tuple[tuple[Insertion, ...], Fraction, Fraction]]:
        return [row for row in self.rows if row[1] != row[2]]

    @property
    def ok(self) -> bool:
        return not self.mismatches and self.lax_ok

    def nonzero(self) -> int:
        return sum(1 for row in self.rows if row[1])

    def summary(self) -> str:
        lines = [
            f"r={self.r}: {len(self.rows)} extended keys, {self.nonzero()} nonzero, "
            f"{len(self.mismatches)} mismatches; Lax identity {'holds' if self.lax_ok else 'FAILS'}",
            "closed inputs to the recursion are read from the hierarchy's closed potential",
        ]
        for ins, rec, hie in self.mismatches[:5]:
            key = CorrelatorKey(self.r, "extended", ins)
            lines.append(f"  {key.text()}: recursion {rec}, hierarchy {hie}")
        return "\n".join(lines)


def lax_identity(engine: Engine, degree: int | None = None) -> tuple[bool, tuple | None]:
    """Primary extended potential against the restricted Lax symbol.

    Checks ``dF/dt^(r-1)_0 = L0(z = L^(1-2r) t^(r-1)_0) / (L^(r-2) r)`` on the
    primary variables, coefficientwise up to ``degree`` (default ``max_n - 1``).
    """
    r = engine.r
    degree = engine.max_n - 1 if degree is None else degree
    if degree > engine.max_n - 1 or degree > engine.L0.cap:
        raise CapExceededError(f"Lax identity to degree {degree} needs larger caps", needed=degree + 1)
    prim = [t_index(r, a, 0) for a in range(r)]
    F = engine.F_ext
    space = VarSpace.t(r, r)

    def restrict(s: TSeries) -> TSeries:
        data = {}
        for exps, c in s.items():
            if any(e for i, e in enumerate(exps) if i not in prim):
                continue
            data[tuple(exps[i] for i in prim)] = c
        return TSeries.from_dict(space, degree, data)

    lhs = restrict(F.derivative(t_index(r, r - 1, 0)))
    cov = ChangeOfVars(r, r)
    z = TSeries.var(space, degree, r - 1, lambda_pow(r, 1 - 2 * r))
    rhs = TSeries.zero(space, degree)
    one = TSeries.constant(space, degree, Scalar.rational(r, 1))
    zpow = one
    sym = engine.L0.symbol
    for i in range(r + 1):
        if i:
            zpow = zpow * z
        c = sym.coefficient(i)
        if not c:
            continue
        ct = to_t_variables(_primary_restrict(c, r, degree), cov)
        rhs = rhs + ct * zpow
    rhs = rhs.scale(lambda_pow(r, -(r - 2)) * Fraction(1, r))
    for exps, c in (lhs.map_coeffs(lambda q: Scalar.rational(r, q)) - rhs).items():
        return False, (exps, c)
    return True, None


def _primary_restrict(c: TSeries, r: int, cap: int) -> TSeries:
    space = VarSpace.T(r)
    data = {}
    for exps, v in c.items():
        if any(exps[r:]):
            continue
        data[exps[:r]] = v
    return TSeries.from_dict(space, cap, data)


# ---------------------------------------------------------------------------
# property checks on computed tables
#
# Each check returns ``None`` when it holds everywhere, else a description of
# the first counterexample. Values are read from the hierarchy side (extended
# potential, closed potential, open potential) unless stated otherwise, so the
# relations are tested independently of the reconstruction path.


def _remove_one(ins: Sequence[Insertion], item: Insertion) -> list[Insertion]:
    out = list(ins)
    out.remove(item)
    return out


def check_string(engine: Engine, source: str = "hierarchy") -> str | None:
    """``<tau^0_0 prod> = sum_(d_i>0) <... tau_(d_i-1) ...>``; the two-point case is a delta."""
    r = engine.r
    value = engine.hierarchy_extended if source == "hierarchy" else engine.extended
    for ins in engine.extended_keys():
        if (0, 0) not in ins:
            continue
        rest = _remove_one(ins, (0, 0))
        if len(rest) == 1:
            a, d = rest[0]
            rhs = Fraction(int(d == 0 and a == r - 1))
        else:
            rhs = Fraction(0)
            for p, (a, d) in enumerate(rest):
                if d:
                    rhs += value(rest[:p] + [(a, d - 1)] + rest[p + 1 :])
        lhs = value(ins)
        if lhs != rhs:
            return f"{CorrelatorKey(r, 'extended', ins).text()}: {lhs} != {rhs}"
    return None


def check_trr_choices(engine: Engine, limit: int | None = None) -> str | None:
    """The general TRR gives the same value for every admissible ``(i, k)``."""
    r = engine.r
    count = 0
    for ins in engine.extended_keys():
        if not any(d for _, d in ins) or len(ins) < 2:
            continue
        target = engine.hierarchy_extended(ins)
        for i, (_, di) in enumerate(ins):
            if not di:
                continue
            for k in range(len(ins)):
                if k == i:
                    continue
                v = engine.trr_general(ins, i, k)
                if v != target:
                    return f"{CorrelatorKey(r, 'extended', ins).text()} with i={i}, k={k}: {v} != {target}"
        count += 1
        if limit is not None and count >= limit:
            break
    return None


def ns_trr(engine: Engine, ins: Sequence[Insertion], i: int, j: int) -> Fraction:
    """Neveu-Schwarz TRR right side; ``i`` non-Ramond with a descendent, ``j`` another ordinary point."""
    r = engine.r
    ins = list(ins)
    ai, di = ins[i]
    if ai == r - 1 or di == 0 or i == j:
        raise MalformedKeyError("NS TRR needs a non-Ramond descendent at i and j != i")
    lowered = (ai, di - 1)
    others = [ins[p] for p in range(len(ins)) if p not in (i, j)]
    total = Fraction(0)
    for I, J in _split_subsets(others, [ins[j]]):
        if not any(a == r - 1 for a, _ in I):
            for alpha in range(r - 1):
                left = engine.closed([(alpha, 0), lowered] + I)
                if left:
                    total += left * engine.hierarchy_extended([(r - 2 - alpha, 0)] + J)
        left = engine.hierarchy_extended([lowered] + I)
        if left:
            total += left * engine.hierarchy_extended([(r - 1, 0)] + J)
    return total


def ramond_trr(engine: Engine, ins: Sequence[Insertion], i: int, j: int) -> Fraction:
    """Ramond TRR right side; ``i`` a Ramond point with a descendent."""
    r = engine.r
    ins = list(ins)
    ai, di = ins[i]
    if ai != r - 1 or di == 0 or i == j:
        raise MalformedKeyError("Ramond TRR needs a Ramond descendent at i and j != i")
    lowered = (ai, di - 1)
    others = [ins[p] for p in range(len(ins)) if p not in (i, j)]
    total = Fraction(0)
    for I, J in _split_subsets(others, [ins[j]]):
        left = engine.hierarchy_extended([lowered] + I)
        if left:
            total += left * engine.hierarchy_extended([(r - 1, 0)] + J)
    return total


def check_specialized_trrs(engine: Engine) -> str | None:
    r = engine.r
    for ins in engine.extended_keys():
        if len(ins) < 2:
            continue
        target = engine.hierarchy_extended(ins)
        for i, (a, d) in enumerate(ins):
            if not d:
                continue
            fn, name = (ramond_trr, "Ramond") if a == r - 1 else (ns_trr, "NS")
            for j in range(len(ins)):
                if j == i:
                    continue
                v = fn(engine, ins, i, j)
                if v != target:
                    return f"{name} TRR at {CorrelatorKey(r, 'extended', ins).text()} (i={i}, j={j}): {v} != {target}"
    return None


class MinusOneDescendents:
    """Extended correlators whose twist ``-1`` point carries a descendent.

    They are defined through the ``-1`` TRR, descending to keys with a
    primary ``-1`` point; ``j, k`` pick the two ordinary points kept together.
    """

    def __init__(self, engine: Engine):
        self.engine = engine
        self.memo: dict[tuple[int, tuple[Insertion, ...]], Fraction] = {}

    def gate(self, d1: int, ins: Sequence[Insertion]) -> bool:
        r = self.engine.r
        s = sum(a for a, _ in ins) - (r - 1)
        if len(ins) < 2 or s < 0 or s % r:
            return False
        return s // r + sum(d for _, d in ins) + d1 == len(ins) - 2

    def value(self, d1: int, ins: Sequence[Insertion], j: int | None = None, k: int | None = None) -> Fraction:
        ins = sorted(ins)
        if d1 == 0:
            return self.engine.hierarchy_extended(ins)
        canonical = j is None and k is None
        key = (d1, tuple(ins))
        if canonical and key in self.memo:
            return self.memo[key]
        if not self.gate(d1, ins):
            v = Fraction(0)
        else:
            v = self._trr(d1, ins, 0 if j is None else j, 1 if k is None else k)
        if canonical:
            self.memo[key] = v
        return v

    def _trr(self, d1: int, ins: list[Insertion], j: int, k: int) -> Fraction:
        r = self.engine.r
        if len(ins) < 2 or j == k:
            raise MalformedKeyError("the -1 TRR needs two distinct ordinary points j, k")
        others = [ins[p] for p in range(len(ins)) if p not in (j, k)]
        total = Fraction(0)
        for I, J in _split_subsets(others, [ins[j], ins[k]]):
            if not any(a == r - 1 for a, _ in J):
                for alpha in range(r - 1):
                    right = self.engine.closed([(r - 2 - alpha, 0)] + J)
                    if right:
                        total += self.value(d1 - 1, [(alpha, 0)] + I) * right
            right = self.engine.hierarchy_extended(J)
            if right:
                total += self.value(d1 - 1, [(r - 1, 0)] + I) * right
        return total


def check_minus_one_trr(engine: Engine, max_d1: int | None = None) -> str | None:
    """The ``-1`` TRR is independent of ``(j, k)``, and its values obey the string equation.

    ``max_d1`` bounds the descendent of the ``-1`` point (default ``max_d``).
    """
    r = engine.r
    mo = MinusOneDescendents(engine)
    max_d1 = engine.max_d if max_d1 is None else max_d1
    for d1 in range(1, max_d1 + 1):
        for ins in multisets(r, engine.max_n - 1, engine.max_d - d1, 2):
            ins = list(ins)
            base = mo.value(d1, ins)
            for j in range(len(ins)):
                for k in range(len(ins)):
                    if j != k and mo.value(d1, ins, j, k) != base:
                        return f"-1 TRR choice (j={j}, k={k}) at d1={d1}, {ins}"
            # string equation with the -1 descendent lowered too
            if len(ins) + 1 > engine.max_n:
                continue
            lhs = mo.value(d1, ins + [(0, 0)])
            rhs = mo.value(d1 - 1, ins)
            for p, (a, d) in enumerate(ins):
                if d:
                    rhs += mo.value(d1, ins[:p] + [(a, d - 1)] + ins[p + 1 :])
            if lhs != rhs:
                return f"string equation with tau^-1_{d1} at {ins}: {lhs} != {rhs}"
    return None


def check_open_dictionary(engine: Engine) -> str | None:
    """Open correlators against ``(-r)^(m-1) <tau^-1 prod (tau^(r-1))^m>``; ``m = 0`` gives 0."""
    r = engine.r
    F = engine.F_open
    s_idx = F.space.count - 1
    if F.filter(lambda e: e[s_idx] == 0):
        return "s-free part of the open potential is nonzero"
    for ins in multisets(r, engine.max_n, engine.max_d):
        for m in range(0, engine.max_n - len(ins) + 1):
            v = engine.open(ins, m)
            if m == 0:
                expect = Fraction(0)
            else:
                expect = Fraction(-r) ** (m - 1) * engine.hierarchy_extended(list(ins) + [(r - 1, 0)] * m)
            if v != expect:
                return f"{CorrelatorKey(r, 'open', ins, m).text()}: {v} != {expect}"
            if v and not open_dimension_ok(r, ins, m):
                return f"{CorrelatorKey(r, 'open', ins, m).text()} = {v} violates the open dimension constraint"
    return None


def _open_first_sum(engine: Engine, lowered: Insertion, others, m: int, fixed: list) -> Fraction:
    r = engine.r
    total = Fraction(0)
    for I, J in _split_subsets(others, fixed):
        left = engine.hierarchy_extended([lowered] + I) if len(I) + 1 >= 2 else Fraction(0)
        if left:
            total += left * engine.open([(r - 1, 0)] + J, m)
        for alpha in range(r - 1):
            left = engine.closed([(alpha, 0), lowered] + I)
            if left:
                total += left * engine.open([(r - 2 - alpha, 0)] + J, m)
    return total


def open_trr1(engine: Engine, ins: Sequence[Insertion], m: int, i: int, j: int) -> Fraction:
    ins = list(ins)
    ai, di = ins[i]
    lowered = (ai, di - 1)
    others = [ins[p] for p in range(len(ins)) if p not in (i, j)]
    total = _open_first_sum(engine, lowered, others, m, [ins[j]])
    for I, J in _split_subsets(others, [ins[j]]):
        for m1 in range(m + 1):
            m2 = m - m1
            left = engine.open([lowered] + I, m1)
            if left:
                total += comb(m, m1) * left * engine.open(J, m2 + 1)
    return total


def open_trr2(engine: Engine, ins: Sequence[Insertion], m: int, i: int) -> Fraction:
    ins = list(ins)
    ai, di = ins[i]
    lowered = (ai, di - 1)
    others = [ins[p] for p in range(len(ins)) if p != i]
    total = _open_first_sum(engine, lowered, others, m, [])
    for I, J in _split_subsets(others):
        for m1 in range(m):
            m2 = m - 1 - m1
            left = engine.open([lowered] + I, m1)
            if left:
                total += comb(m - 1, m1) * left * engine.open(J, m2 + 2)
    return total


def check_open_trrs(engine: Engine) -> str | None:
    r = engine.r
    for ins in multisets(r, engine.max_n, engine.max_d, 1):
        for m in range(0, engine.max_n - len(ins) + 1):
            target = engine.open(ins, m)
            for i, (_, d) in enumerate(ins):
                if not d:
                    continue
                for j in range(len(ins)):
                    if j != i:
                        v = open_trr1(engine, ins, m, i, j)
                        if v != target:
                            return f"open TRR1 at {CorrelatorKey(r, 'open', ins, m).text()} (i={i}, j={j}): {v} != {target}"
                if m >= 1:
                    v = open_trr2(engine, ins, m, i)
                    if v != target:
                        return f"open TRR2 at {CorrelatorKey(r, 'open', ins, m).text()} (i={i}): {v} != {target}"
    return None


def check_ramond_vanishing(engine: Engine) -> str | None:
    """Every in-cap closed monomial with a twist ``r-1`` variable has coefficient 0."""
    r = engine.r
    F = engine.F0_closed
    for exps, c in F.items():
        for idx, e in enumerate(exps):
            if e and F.space.labels[idx][0] == r - 1:
                return f"closed monomial {monomial_text(F.space.names, exps)} has coefficient {c}"
    return None


def check_dimension(engine: Engine) -> str | None:
    """Nonzero coefficients of the closed and extended potentials satisfy the dimension constraints."""
    r = engine.r
    for name, F, ok in (
        ("closed", engine.F0_closed, closed_dimension_ok),
        ("extended", engine.F_ext, extended_dimension_ok),
    ):
        labels = F.space.labels
        for exps, c in F.items():
            ins = [labels[i] for i, e in enumerate(exps) for _ in range(e)]
            if not ok(r, ins):
                return f"{name} monomial {monomial_text(F.space.names, exps)} = {c} off the dimension constraint"
    return None
