"""Exact scalars: the quotient ring Q[L]/(L^(2(r+1)) + r) and epsilon-graded coefficients.

``L`` stands for a fixed root ``(-r)^(1/(2(r+1)))``; every fractional power of ``-r``
that shows up in the variable rescalings is an integer power of it, and
``sqrt(-r)`` is taken to be ``L^(r+1)``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import EpsWindowError, MixedRError, NotMonomialUnitError, NotRationalError

Rational = Fraction
RationalLike = Union[int, Fraction]

__all__ = [
    "Rational",
    "Scalar",
    "EpsScalar",
    "ring_arith",
    "lambda_pow",
    "invert_unit",
    "as_rational",
    "sqrt_minus_r",
    "format_rational",
]


def format_rational(q: RationalLike) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class Scalar:
    """Element of R_r = Q[L]/(L^(2(r+1)) + r), stored on the basis 1, L, ..., L^(2r+1)."""

    __slots__ = ("r", "coeffs")

    def __init__(self, r: int, coeffs: Iterable[RationalLike] = ()):
        if r < 2:
            raise ValueError(f"r must be >= 2, got {r}")
        size = 2 * (r + 1)
        cs = [Fraction(c) for c in coeffs]
        if len(cs) > size:
            raise ValueError(f"at most {size} coefficients for r={r}")
        cs.extend([Fraction(0)] * (size - len(cs)))
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    @classmethod
    def rational(cls, r: int, q: RationalLike) -> Scalar:
        return cls(r, [q])

    @classmethod
    def monomial(cls, r: int, q: RationalLike, k: int) -> Scalar:
        """``q * L^k`` for any integer ``k``."""
        return lambda_pow(r, k) * Fraction(q)

    @property
    def size(self) -> int:
        return 2 * (self.r + 1)

    def _coerce(self, other) -> Scalar:
        if isinstance(other, Scalar):
            if other.r != self.r:
                raise MixedRError(f"cannot combine r={self.r} with r={other.r}")
            return other
        if isinstance(other, (int, Fraction)):
            return Scalar.rational(self.r, other)
        return NotImplemented

    def __add__(self, other) -> Scalar:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return Scalar(self.r, [a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self) -> Scalar:
        return Scalar(self.r, [-a for a in self.coeffs])

    def __sub__(self, other) -> Scalar:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> Scalar:
        return (-self) + other

    def __mul__(self, other) -> Scalar:
        if isinstance(other, (int, Fraction)):
            return Scalar(self.r, [a * other for a in self.coeffs])
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        size = self.size
        prod = [Fraction(0)] * (2 * size - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(o.coeffs):
                if b:
                    prod[i + j] += a * b
        # L^size = -r; the top exponent 2*size - 2 needs a single reduction step
        for e in range(2 * size - 2, size - 1, -1):
            if prod[e]:
                prod[e - size] -= self.r * prod[e]
        return Scalar(self.r, prod[:size])

    __rmul__ = __mul__

    def __truediv__(self, other) -> Scalar:
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        return self * invert_unit(other)

    def __pow__(self, n: int) -> Scalar:
        if n < 0:
            return invert_unit(self) ** (-n)
        result = Scalar.rational(self.r, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, Scalar):
            return self.r == other.r and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs[0] == other and not any(self.coeffs[1:])
        return NotImplemented

    def __hash__(self) -> int:
        if not any(self.coeffs[1:]):
            return hash(self.coeffs[0])
        return hash((self.r, self.coeffs))

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def support(self) -> list[int]:
        return [k for k, c in enumerate(self.coeffs) if c]

    def __repr__(self) -> str:
        return f"Scalar(r={self.r}, {self})"

    def __str__(self) -> str:
        parts = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            if k == 0:
                parts.append(format_rational(c))
            elif c == 1:
                parts.append(f"L^{k}")
            else:
                parts.append(f"{format_rational(c)}*L^{k}")
        if not parts:
            return "0"
        return " + ".join(parts).replace("+ -", "- ")


def ring_arith(a: Scalar, b: Scalar | None, op: str) -> Scalar:
    """Dispatch ``add``/``mul``/``neg``; ``b`` is ignored for ``neg``."""
    if op == "neg":
        return -a
    if b is None:
        raise ValueError(f"op {op!r} needs two operands")
    if a.r != b.r:
        raise MixedRError(f"cannot combine r={a.r} with r={b.r}")
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def lambda_pow(r: int, k: int) -> Scalar:
    """``L^k`` reduced; negative ``k`` uses ``L^-1 = -L^(2r+1)/r``."""
    size = 2 * (r + 1)
    q, e = divmod(k, size)
    # L^k = (L^size)^q * L^e = (-r)^q * L^e, valid for negative q as well
    coeff = Fraction(-r) ** q
    cs = [Fraction(0)] * size
    cs[e] = coeff
    return Scalar(r, cs)


def invert_unit(a: Scalar) -> Scalar:
    support = a.support()
    if len(support) != 1:
        raise NotMonomialUnitError(
            f"only monomials q*L^k can be inverted, got {a} (support {support})"
        )
    k = support[0]
    return lambda_pow(a.r, -k) * (1 / a.coeffs[k])


def as_rational(a: Scalar | RationalLike) -> Fraction:
    if isinstance(a, (int, Fraction)):
        return Fraction(a)
    if not a.is_rational():
        raise NotRationalError(f"{a} has irrational components")
    return a.coeffs[0]


def sqrt_minus_r(r: int) -> Scalar:
    return lambda_pow(r, r + 1)


class EpsScalar:
    """Laurent polynomial in epsilon restricted to ``[lo, hi]``.

    Products that land above ``hi`` are dropped and ``truncated`` is set; anything
    below ``lo`` raises, since it would carry information the window cannot hold.
    """

    __slots__ = ("lo", "hi", "coeffs", "truncated")

    def __init__(
        self,
        lo: int,
        hi: int,
        coeffs: Mapping[int, RationalLike] | None = None,
        truncated: bool = False,
    ):
        if lo > hi:
            raise ValueError(f"empty window [{lo}, {hi}]")
        cs: dict[int, Fraction] = {}
        trunc = truncated
        for e, c in (coeffs or {}).items():
            if not c:
                continue
            if e < lo:
                raise EpsWindowError(f"epsilon^{e} below window start {lo}")
            if e > hi:
                trunc = True
                continue
            cs[e] = Fraction(c)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "coeffs", cs)
        object.__setattr__(self, "truncated", trunc)

    def __setattr__(self, name, value):
        raise AttributeError("EpsScalar is immutable")

    @classmethod
    def eps(cls, lo: int, hi: int, k: int = 1, q: RationalLike = 1) -> EpsScalar:
        return cls(lo, hi, {k: q})

    def _check(self, other: EpsScalar) -> None:
        if (self.lo, self.hi) != (other.lo, other.hi):
            raise EpsWindowError(
                f"window mismatch [{self.lo},{self.hi}] vs [{other.lo},{other.hi}]"
            )

    def __add__(self, other) -> EpsScalar:
        if isinstance(other, (int, Fraction)):
            other = EpsScalar(self.lo, self.hi, {0: other})
        if not isinstance(other, EpsScalar):
            return NotImplemented
        self._check(other)
        cs = dict(self.coeffs)
        for e, c in other.coeffs.items():
            cs[e] = cs.get(e, 0) + c
        return EpsScalar(self.lo, self.hi, cs, self.truncated or other.truncated)

    __radd__ = __add__

    def __neg__(self) -> EpsScalar:
        return EpsScalar(self.lo, self.hi, {e: -c for e, c in self.coeffs.items()}, self.truncated)

    def __sub__(self, other) -> EpsScalar:
        return self + (-other)

    def __rsub__(self, other) -> EpsScalar:
        return (-self) + other

    def __mul__(self, other) -> EpsScalar:
        if isinstance(other, (int, Fraction)):
            if not other:
                return EpsScalar(self.lo, self.hi, {}, self.truncated)
            return EpsScalar(
                self.lo, self.hi, {e: c * other for e, c in self.coeffs.items()}, self.truncated
            )
        if not isinstance(other, EpsScalar):
            return NotImplemented
        self._check(other)
        cs: dict[int, Fraction] = {}
        trunc = self.truncated or other.truncated
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = e1 + e2
                if e > self.hi:
                    trunc = True
                    continue
                cs[e] = cs.get(e, 0) + c1 * c2
        return EpsScalar(self.lo, self.hi, cs, trunc)

    __rmul__ = __mul__

    def __truediv__(self, other: RationalLike) -> EpsScalar:
        return self * (Fraction(1) / Fraction(other))

    def shift(self, k: int) -> EpsScalar:
        """Multiply by ``epsilon^k``."""
        return EpsScalar(self.lo, self.hi, {e + k: c for e, c in self.coeffs.items()}, self.truncated)

    def layer(self, e: int) -> Fraction:
        return self.coeffs.get(e, Fraction(0))

    def min_exponent(self) -> int | None:
        return min(self.coeffs) if self.coeffs else None

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, EpsScalar):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            if not other:
                return not self.coeffs
            return self.coeffs == {0: other}
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.coeffs.items())))

    def __repr__(self) -> str:
        return f"EpsScalar([{self.lo},{self.hi}], {self})"

    def __str__(self) -> str:
        parts = []
        for e in sorted(self.coeffs):
            c = self.coeffs[e]
            if e == 0:
                parts.append(format_rational(c))
            elif c == 1:
                parts.append(f"e^{e}")
            else:
                parts.append(f"{format_rational(c)}*e^{e}")
        return " + ".join(parts).replace("+ -", "- ") if parts else "0"
