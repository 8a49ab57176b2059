"""Sparse truncated multivariate power series over an exact coefficient ring.

Monomials are packed into a single integer: exponent ``i`` lives in bit field
``i`` of width ``bits``, and the total degree sits above all of them, so adding
two keys multiplies the monomials and keeps the degree in step. Any digit
overflow implies the total degree exceeds the cap, and such terms are dropped
before the key is ever read back.

Coefficients may be ``Fraction``, :class:`~rspin.scalar.Scalar` or
:class:`~rspin.scalar.EpsScalar`; anything supporting ``+``, ``*``, unary ``-``
and truthiness works.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping, Sequence

from .errors import (
    BadVarError,
    CapExceededError,
    NonLinearSubstitutionError,
    OutOfCapError,
    SpaceMismatchError,
)
from .scalar import Scalar, format_rational

__all__ = [
    "VarSpace",
    "TSeries",
    "mul_truncated",
    "derivative",
    "coefficient",
    "substitute_linear",
    "substitute_series",
]


@dataclass(frozen=True)
class VarSpace:
    """Ordered set of formal variables.

    ``kind`` is one of ``"T"``, ``"t"``, ``"v"``, ``"f"`` (or anything else for ad hoc
    spaces). Internally variables are addressed by 0-based position; for T-vars
    position ``i`` is ``T_{i+1}``.
    """

    kind: str
    names: tuple[str, ...]
    labels: tuple[Any, ...] | None = None

    @property
    def count(self) -> int:
        return len(self.names)

    @classmethod
    def T(cls, n: int) -> VarSpace:
        return cls("T", tuple(f"T{k}" for k in range(1, n + 1)))

    @classmethod
    def t(cls, r: int, n: int, extra: Sequence[str] = ()) -> VarSpace:
        """t-variables matching ``T_1..T_n`` (``T_k`` carries twist ``(k-1) % r`` and
        descendent ``(k-1) // r``), followed by optional extra plain variables."""
        labels = tuple(((k - 1) % r, (k - 1) // r) for k in range(1, n + 1))
        names = tuple(f"t{a}_{d}" for a, d in labels) + tuple(extra)
        return cls("t", names, labels + tuple((None, None) for _ in extra))

    @classmethod
    def v(cls, n: int) -> VarSpace:
        return cls("v", tuple(f"v{i}" for i in range(1, n + 1)))

    @classmethod
    def f(cls, r: int) -> VarSpace:
        return cls("f", tuple(f"f{i}" for i in range(r - 1)))

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise BadVarError(f"no variable {name!r} in {self.kind}-space") from None

    def label_index(self, label) -> int:
        if self.labels is None:
            raise BadVarError(f"{self.kind}-space carries no labels")
        try:
            return self.labels.index(label)
        except ValueError:
            raise BadVarError(f"no variable labelled {label!r}") from None


def _bits_for(cap: int) -> int:
    return max(1, cap.bit_length())


class TSeries:
    """Immutable truncated power series.

    ``terms`` maps packed monomial keys to nonzero coefficients; use
    :meth:`from_dict` / :meth:`items` to work with exponent tuples.
    """

    __slots__ = ("space", "cap", "terms", "bits", "top", "mask")

    def __init__(self, space: VarSpace, cap: int, terms: Mapping[int, Any] | None = None):
        if cap < 0:
            raise ValueError("cap must be nonnegative")
        self.space = space
        self.cap = cap
        self.bits = _bits_for(cap)
        self.top = self.bits * space.count
        self.mask = (1 << self.bits) - 1
        self.terms: dict[int, Any] = {k: c for k, c in (terms or {}).items() if c}

    # -- packing -----------------------------------------------------------
    def pack(self, exps: Sequence[int]) -> int:
        if len(exps) != self.space.count:
            raise BadVarError(f"expected {self.space.count} exponents, got {len(exps)}")
        key = 0
        for i, e in enumerate(exps):
            if e < 0:
                raise BadVarError("negative exponent")
            key |= e << (self.bits * i)
        return key | (sum(exps) << self.top)

    def unpack(self, key: int) -> tuple[int, ...]:
        b, m = self.bits, self.mask
        return tuple((key >> (b * i)) & m for i in range(self.space.count))

    def key_degree(self, key: int) -> int:
        return key >> self.top

    def var_key(self, i: int) -> int:
        return (1 << (self.bits * i)) | (1 << self.top)

    # -- construction ------------------------------------------------------
    @classmethod
    def zero(cls, space: VarSpace, cap: int) -> TSeries:
        return cls(space, cap)

    @classmethod
    def constant(cls, space: VarSpace, cap: int, value) -> TSeries:
        return cls(space, cap, {0: value})

    @classmethod
    def var(cls, space: VarSpace, cap: int, i: int, coeff=Fraction(1)) -> TSeries:
        if not 0 <= i < space.count:
            raise BadVarError(f"variable index {i} outside {space.kind}-space")
        s = cls(space, cap)
        if cap >= 1:
            s.terms[s.var_key(i)] = coeff
        return s

    @classmethod
    def from_dict(cls, space: VarSpace, cap: int, data: Mapping[Sequence[int], Any]) -> TSeries:
        s = cls(space, cap)
        for exps, c in data.items():
            if c and sum(exps) <= cap:
                k = s.pack(exps)
                s.terms[k] = s.terms.get(k, 0) + c
        s.terms = {k: c for k, c in s.terms.items() if c}
        return s

    def _new(self, terms: dict[int, Any]) -> TSeries:
        out = TSeries.__new__(TSeries)
        out.space, out.cap, out.bits, out.top, out.mask = (
            self.space,
            self.cap,
            self.bits,
            self.top,
            self.mask,
        )
        out.terms = terms
        return out

    def like(self, terms: dict[int, Any] | None = None) -> TSeries:
        """Series in the same space/cap; zero coefficients are filtered."""
        return self._new({k: c for k, c in (terms or {}).items() if c})

    # -- inspection --------------------------------------------------------
    def _check(self, other: TSeries) -> None:
        if self.space != other.space or self.cap != other.cap:
            raise SpaceMismatchError(
                f"{self.space.kind}[{self.space.count}]/cap {self.cap} vs "
                f"{other.space.kind}[{other.space.count}]/cap {other.cap}"
            )

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def items(self) -> list[tuple[tuple[int, ...], Any]]:
        """Terms as ``(exponents, coeff)`` in graded-lex order."""
        return [(self.unpack(k), self.terms[k]) for k in self._sorted_keys()]

    def _sorted_keys(self) -> list[int]:
        return sorted(self.terms, key=lambda k: (self.key_degree(k), tuple(-e for e in self.unpack(k))))

    def constant_term(self):
        return self.terms.get(0, 0)

    def min_degree(self) -> int | None:
        return min((self.key_degree(k) for k in self.terms), default=None)

    def max_degree(self) -> int | None:
        return max((self.key_degree(k) for k in self.terms), default=None)

    def coefficient(self, mono: Sequence[int]):
        if sum(mono) > self.cap:
            raise OutOfCapError(f"monomial of degree {sum(mono)} beyond cap {self.cap}")
        return self.terms.get(self.pack(mono), 0)

    def __eq__(self, other) -> bool:
        if isinstance(other, TSeries):
            return self.space == other.space and self.cap == other.cap and self.terms == other.terms
        if not other:
            return not self.terms
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"TSeries({self.space.kind}[{self.space.count}], cap={self.cap}, {self.to_text()})"

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other) -> TSeries:
        if not isinstance(other, TSeries):
            return self + TSeries.constant(self.space, self.cap, other)
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            if k in out:
                s = out[k] + c
                if s:
                    out[k] = s
                else:
                    del out[k]
            else:
                out[k] = c
        return self._new(out)

    __radd__ = __add__

    def __neg__(self) -> TSeries:
        return self._new({k: -c for k, c in self.terms.items()})

    def __sub__(self, other) -> TSeries:
        return self + (-other)

    def __rsub__(self, other) -> TSeries:
        return (-self) + other

    def scale(self, c) -> TSeries:
        if not c:
            return self._new({})
        out = {}
        for k, v in self.terms.items():
            p = v * c
            if p:
                out[k] = p
        return self._new(out)

    def __mul__(self, other) -> TSeries:
        if isinstance(other, TSeries):
            return mul_truncated(self, other)
        return self.scale(other)

    def __rmul__(self, other) -> TSeries:
        return self.scale(other)

    def __pow__(self, n: int) -> TSeries:
        if n < 0:
            raise ValueError("negative power of a series")
        result = TSeries.constant(self.space, self.cap, Fraction(1))
        for _ in range(n):
            result = result * self
        return result

    def truncate(self, cap: int) -> TSeries:
        """Drop terms above ``cap`` (also re-packs when ``cap`` differs)."""
        if cap == self.cap:
            return self
        out = TSeries(self.space, cap)
        for k, c in self.terms.items():
            if self.key_degree(k) <= cap:
                out.terms[out.pack(self.unpack(k))] = c
        return out

    def filter(self, keep: Callable[[tuple[int, ...]], bool]) -> TSeries:
        return self._new({k: c for k, c in self.terms.items() if keep(self.unpack(k))})

    def map_coeffs(self, fn: Callable[[Any], Any]) -> TSeries:
        return self.like({k: fn(c) for k, c in self.terms.items()})

    def derivative(self, var: int) -> TSeries:
        return derivative(self, var)

    def set_to_zero(self, variables: Iterable[int]) -> TSeries:
        vs = list(variables)
        b, m = self.bits, self.mask
        return self._new(
            {k: c for k, c in self.terms.items() if all(((k >> (b * i)) & m) == 0 for i in vs)}
        )

    # -- text --------------------------------------------------------------
    def to_text(self) -> str:
        if not self.terms:
            return "0"
        return join_terms(
            (format_coefficient(self.terms[k]), monomial_text(self.space.names, self.unpack(k)))
            for k in self._sorted_keys()
        )


def format_coefficient(c) -> str:
    if isinstance(c, (int, Fraction)):
        return format_rational(c)
    s = str(c)
    if isinstance(c, Scalar) and len(c.support()) == 1 and c.support()[0] == 0:
        return s
    if " " in s:
        return f"({s})"
    return s


def monomial_text(names: Sequence[str], exps: Sequence[int]) -> str:
    parts = []
    for name, e in zip(names, exps):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def join_terms(pairs: Iterable[tuple[str, str]]) -> str:
    """Join ``(coefficient_text, monomial_text)`` pairs into ``a*x + b*y - c``."""
    out: list[str] = []
    for coeff, mono in pairs:
        neg = coeff.startswith("-") and not coeff.startswith("(")
        if neg:
            coeff = coeff[1:]
        if mono:
            body = mono if coeff == "1" else f"{coeff}*{mono}"
        else:
            body = coeff
        if not out:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out) if out else "0"


def mul_truncated(a: TSeries, b: TSeries) -> TSeries:
    a._check(b)
    if not a.terms or not b.terms:
        return a._new({})
    top, cap = a.top, a.cap
    # bucket b by degree so the inner loop stops at the cap
    by_deg: dict[int, list[tuple[int, Any]]] = {}
    for k, c in b.terms.items():
        by_deg.setdefault(k >> top, []).append((k, c))
    b_degs = sorted(by_deg)
    out: dict[int, Any] = {}
    get = out.get
    for ka, ca in a.terms.items():
        room = cap - (ka >> top)
        if room < 0:
            continue
        for d in b_degs:
            if d > room:
                break
            for kb, cb in by_deg[d]:
                k = ka + kb
                p = ca * cb
                prev = get(k)
                out[k] = p if prev is None else prev + p
    return a._new({k: c for k, c in out.items() if c})


def derivative(a: TSeries, var: int) -> TSeries:
    if not 0 <= var < a.space.count:
        raise BadVarError(f"variable index {var} outside {a.space.kind}-space of size {a.space.count}")
    shift = a.bits * var
    step = (1 << shift) | (1 << a.top)
    m = a.mask
    out = {}
    for k, c in a.terms.items():
        e = (k >> shift) & m
        if e:
            out[k - step] = c * e
    return a._new(out)


def coefficient(a: TSeries, mono: Sequence[int]):
    return a.coefficient(mono)


def _linear_form(
    target: VarSpace, cap: int, form: Sequence[tuple[int, Any]]
) -> TSeries:
    s = TSeries(target, cap)
    if cap < 1:
        return s
    for j, c in form:
        if not 0 <= j < target.count:
            raise BadVarError(f"target index {j} outside {target.kind}-space")
        k = s.var_key(j)
        s.terms[k] = s.terms.get(k, 0) + c
    s.terms = {k: c for k, c in s.terms.items() if c}
    return s


def substitute_linear(
    a: TSeries,
    mapping: Mapping[int, Any],
    target: VarSpace | None = None,
) -> TSeries:
    """Substitute each variable by a linear form in ``target`` variables.

    ``mapping[i]`` is either ``(scale, shift_var, shift_scale)`` meaning
    ``x_i -> scale*y_i + shift_scale*y_{shift_var}`` (``shift_var`` may be ``None``),
    or a list of ``(target_index, coeff)`` pairs. Unmapped variables go to the
    same position in ``target``. No constant shifts are allowed.
    """
    target = target or a.space
    forms: dict[int, list[tuple[int, Any]]] = {}
    for i in range(a.space.count):
        entry = mapping.get(i)
        if entry is None:
            if i >= target.count:
                raise BadVarError(f"unmapped variable {a.space.names[i]} has no slot in target")
            forms[i] = [(i, Fraction(1))]
        elif isinstance(entry, tuple) and len(entry) == 3 and not isinstance(entry[0], tuple):
            scale, shift_var, shift_scale = entry
            form = [(i, scale)]
            if shift_var is not None:
                form.append((shift_var, shift_scale))
            forms[i] = form
        else:
            try:
                forms[i] = [(int(j), c) for j, c in entry]
            except (TypeError, ValueError):
                raise NonLinearSubstitutionError(
                    f"substitution for {a.space.names[i]} is not a linear form"
                ) from None
    images = {i: _linear_form(target, a.cap, f) for i, f in forms.items()}
    return _compose(a, images, target, a.cap)


def _compose(a: TSeries, images: Mapping[int, TSeries], target: VarSpace, cap: int) -> TSeries:
    one = TSeries.constant(target, cap, Fraction(1))
    powers: dict[tuple[int, int], TSeries] = {}

    def power(i: int, e: int) -> TSeries:
        if e == 0:
            return one
        key = (i, e)
        if key not in powers:
            powers[key] = power(i, e - 1) * images[i]
        return powers[key]

    result: dict[int, Any] = {}
    for exps, c in a.items():
        term = one.scale(c)
        for i, e in enumerate(exps):
            if e:
                term = term * power(i, e)
                if not term:
                    break
        for k, v in term.terms.items():
            result[k] = result.get(k, 0) + v
    return one.like(result)


def substitute_series(p: TSeries, assignment: Sequence[TSeries] | Mapping[int, TSeries]) -> TSeries:
    """Compose a polynomial ``p`` with series for each of its variables.

    Every variable of ``p`` must be assigned. All assigned series must share one
    space and cap, which is the space of the result.
    """
    if isinstance(assignment, Mapping):
        images = dict(assignment)
    else:
        images = dict(enumerate(assignment))
    missing = [p.space.names[i] for i in range(p.space.count) if i not in images]
    used = {i for exps, _ in p.items() for i, e in enumerate(exps) if e}
    if used & {p.space.index(n) for n in missing}:
        raise BadVarError(f"no series assigned to {missing}")
    first = next(iter(images.values()))
    for s in images.values():
        first._check(s)
    has_constant = any(s.constant_term() for s in images.values())
    if has_constant and p.terms and p.max_degree() >= p.cap:
        raise CapExceededError(
            "polynomial reaches its own cap and the substitution has constant terms; "
            "truncated terms of the polynomial would feed low degrees",
            needed=p.cap + 1,
        )
    return _compose(p, images, first.space, first.cap)

