"""Commutative Laurent series in ``z`` with power-series coefficients.

A symbol knows how far down its coefficients are trustworthy: ``low`` is the
smallest exponent that is guaranteed correct, or ``None`` when the symbol is an
exact Laurent polynomial. Reading below ``low`` is an error.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .errors import BelowValidRangeError, DepthUnreachableError, NotMonicError
from .series import TSeries, VarSpace, join_terms, format_coefficient, monomial_text

__all__ = ["ZSymbol", "mul", "split", "residue", "fractional_power", "poisson", "gen_binomial"]


def gen_binomial(q: Fraction, k: int) -> Fraction:
    """``q choose k`` for rational ``q``."""
    out = Fraction(1)
    for i in range(k):
        out = out * (q - i) / (i + 1)
    return out


class ZSymbol:
    __slots__ = ("space", "cap", "coeffs", "low")

    def __init__(
        self,
        space: VarSpace,
        cap: int,
        coeffs: Mapping[int, TSeries] | None = None,
        low: int | None = None,
    ):
        self.space = space
        self.cap = cap
        self.low = low
        cs: dict[int, TSeries] = {}
        for e, c in (coeffs or {}).items():
            if c and (low is None or e >= low):
                cs[e] = c
        self.coeffs = cs

    # -- construction ------------------------------------------------------
    @classmethod
    def z_power(cls, space: VarSpace, cap: int, n: int, coeff=Fraction(1)) -> ZSymbol:
        return cls(space, cap, {n: TSeries.constant(space, cap, coeff)})

    @classmethod
    def from_coefficients(
        cls, space: VarSpace, cap: int, coeffs: Mapping[int, TSeries], low: int | None = None
    ) -> ZSymbol:
        return cls(space, cap, coeffs, low)

    def _like(self, coeffs: Mapping[int, TSeries], low: int | None) -> ZSymbol:
        return ZSymbol(self.space, self.cap, coeffs, low)

    # -- inspection --------------------------------------------------------
    @property
    def top(self) -> int | None:
        return max(self.coeffs) if self.coeffs else None

    def zero_series(self) -> TSeries:
        return TSeries.zero(self.space, self.cap)

    def coefficient(self, e: int) -> TSeries:
        if self.low is not None and e < self.low:
            raise BelowValidRangeError(f"z^{e} requested, symbol valid only down to z^{self.low}")
        return self.coeffs.get(e) or self.zero_series()

    def __getitem__(self, e: int) -> TSeries:
        return self.coefficient(e)

    def is_monic(self) -> bool:
        t = self.top
        return t is not None and self.coeffs[t].terms == {0: 1}

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ZSymbol):
            return NotImplemented
        return self.coeffs.keys() == other.coeffs.keys() and all(
            self.coeffs[e] == other.coeffs[e] for e in self.coeffs
        )

    __hash__ = None  # type: ignore[assignment]

    def agrees_with(self, other: ZSymbol, down_to: int | None = None) -> bool:
        """Equality on the range both symbols (and ``down_to``) guarantee."""
        lows = [x for x in (self.low, other.low, down_to) if x is not None]
        bound = max(lows) if lows else None
        keys = {e for e in set(self.coeffs) | set(other.coeffs) if bound is None or e >= bound}
        return all(
            (self.coeffs.get(e) or self.zero_series()) == (other.coeffs.get(e) or other.zero_series())
            for e in keys
        )

    # -- linear structure ----------------------------------------------------
    @staticmethod
    def _merge_low(a: int | None, b: int | None) -> int | None:
        if a is None:
            return b
        if b is None:
            return a
        return max(a, b)

    def __add__(self, other: ZSymbol) -> ZSymbol:
        low = self._merge_low(self.low, other.low)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out[e] + c if e in out else c
        return self._like(out, low)

    def __neg__(self) -> ZSymbol:
        return self._like({e: -c for e, c in self.coeffs.items()}, self.low)

    def __sub__(self, other: ZSymbol) -> ZSymbol:
        return self + (-other)

    def scale(self, c) -> ZSymbol:
        return self._like({e: s.scale(c) for e, s in self.coeffs.items()}, self.low)

    def times_series(self, s: TSeries) -> ZSymbol:
        return self._like({e: c * s for e, c in self.coeffs.items()}, self.low)

    def shift(self, n: int) -> ZSymbol:
        """Multiply by ``z^n``."""
        return self._like(
            {e + n: c for e, c in self.coeffs.items()}, None if self.low is None else self.low + n
        )

    def __mul__(self, other):
        if isinstance(other, ZSymbol):
            return mul(self, other)
        return self.scale(other)

    def truncate_below(self, depth: int) -> ZSymbol:
        low = depth if self.low is None else max(self.low, depth)
        return self._like(self.coeffs, low)

    # -- calculus ------------------------------------------------------------
    def d_dz(self) -> ZSymbol:
        out = {e - 1: c.scale(e) for e, c in self.coeffs.items() if e}
        return self._like(out, None if self.low is None else self.low - 1)

    def d_dx(self, x: int = 0) -> ZSymbol:
        return self._like({e: c.derivative(x) for e, c in self.coeffs.items()}, self.low)

    def derivative(self, var: int) -> ZSymbol:
        return self.d_dx(var)

    def map_series(self, fn) -> ZSymbol:
        return self._like({e: fn(c) for e, c in self.coeffs.items()}, self.low)

    def evaluate(self, z_value: TSeries) -> TSeries:
        """Substitute a series for ``z``; only for polynomials in ``z``."""
        if self.coeffs and min(self.coeffs) < 0:
            raise BelowValidRangeError("cannot substitute into negative powers of z")
        if self.low is not None and self.low > 0:
            raise BelowValidRangeError(f"symbol only valid down to z^{self.low}")
        result = self.zero_series()
        if not self.coeffs:
            return result
        power = TSeries.constant(self.space, self.cap, Fraction(1))
        for e in range(0, max(self.coeffs) + 1):
            if e:
                power = power * z_value
            c = self.coeffs.get(e)
            if c:
                result = result + c * power
        return result

    # -- text ----------------------------------------------------------------
    def to_text(self, var: str = "z") -> str:
        pairs = []
        for e in sorted(self.coeffs, reverse=True):
            zmono = "" if e == 0 else (var if e == 1 else f"{var}^{e}")
            c = self.coeffs[e]
            if len(c) == 1:
                (exps, coeff), = c.items()
                mono = "*".join(x for x in (monomial_text(c.space.names, exps), zmono) if x)
                pairs.append((format_coefficient(coeff), mono))
            else:
                pairs.append((f"({c.to_text()})", zmono))
        text = join_terms(pairs)
        if self.low is not None:
            text += f" + O({var}^{self.low - 1})"
        return text

    def __repr__(self) -> str:
        return f"ZSymbol({self.to_text()})"


def _product_low(a: ZSymbol, b: ZSymbol) -> int | None:
    ta, tb = a.top, b.top
    lows = []
    if a.low is not None and tb is not None:
        lows.append(a.low + tb)
    if b.low is not None and ta is not None:
        lows.append(b.low + ta)
    return max(lows) if lows else None


def mul(a: ZSymbol, b: ZSymbol, depth: int | None = None) -> ZSymbol:
    """Product, keeping only exponents that are both valid and ``>= depth``."""
    if a.space != b.space or a.cap != b.cap:
        a.zero_series()._check(b.zero_series())
    if not a.coeffs or not b.coeffs:
        low = _product_low(a, b)
        return a._like({}, low if depth is None else ZSymbol._merge_low(low, depth))
    low = ZSymbol._merge_low(_product_low(a, b), depth)
    out: dict[int, TSeries] = {}
    for ea, ca in a.coeffs.items():
        for eb, cb in b.coeffs.items():
            e = ea + eb
            if low is not None and e < low:
                continue
            p = ca * cb
            if p:
                out[e] = out[e] + p if e in out else p
    return a._like(out, low)


def split(a: ZSymbol) -> tuple[ZSymbol, ZSymbol]:
    if a.low is not None and a.low > 0:
        raise BelowValidRangeError(f"plus part needs z^0, symbol valid down to z^{a.low}")
    plus = a._like({e: c for e, c in a.coeffs.items() if e >= 0}, None)
    minus = a._like({e: c for e, c in a.coeffs.items() if e < 0}, a.low)
    return plus, minus


def residue(a: ZSymbol) -> TSeries:
    if a.low is not None and a.low > -1:
        raise BelowValidRangeError(f"residue needs z^-1, symbol valid down to z^{a.low}")
    return a.coefficient(-1)


def fractional_power(a: ZSymbol, n: int, depth: int) -> ZSymbol:
    """``a^(n/r)`` for monic ``a`` of top degree ``r``, valid down to ``z^depth``.

    Computed as ``z^n (1+u)^(n/r)`` with ``u = (a - z^r) z^-r``.
    """
    if not a.is_monic():
        raise NotMonicError(f"leading coefficient of {a.to_text()} is not 1")
    r = a.top
    if r < 1:
        raise NotMonicError("top degree must be positive")
    u = a._like({e - r: c for e, c in a.coeffs.items() if e != r}, None if a.low is None else a.low - r)
    if u.low is not None and n + u.low > depth:
        raise DepthUnreachableError(
            f"input valid down to z^{a.low}; z^{depth} of the {n}/{r} power is not determined"
        )
    q = Fraction(n, r)
    result: dict[int, TSeries] = {n: TSeries.constant(a.space, a.cap, Fraction(1))}
    power = a._like({0: TSeries.constant(a.space, a.cap, Fraction(1))}, None)
    k = 0
    while True:
        k += 1
        power = mul(power, u, depth - n)
        if not power.coeffs:
            break
        c = gen_binomial(q, k)
        if c:
            for e, s in power.coeffs.items():
                term = s.scale(c)
                e += n
                result[e] = result[e] + term if e in result else term
    return a._like(result, depth)


def poisson(a: ZSymbol, b: ZSymbol, x: int = 0) -> ZSymbol:
    """``{a, b} = da/dz * db/dx - da/dx * db/dz`` with ``x`` the index of ``T_1``."""
    return mul(a.d_dz(), b.d_dx(x)) - mul(a.d_dx(x), b.d_dz())
