"""Pseudo-differential operators with power-series coefficients.

Operators are written as ``sum_i a_i D^i`` with ``D = hbar * d/dx`` and ``x`` the
first variable of the coefficient space. With ``hbar = 1`` this is the plain
``d/dx`` algebra; the dispersive hierarchy uses ``hbar = eps`` (an
:class:`~rspin.scalar.EpsScalar`), which keeps every coefficient a power
series in ``eps`` with nonnegative exponents. Composition follows

    D^k o f = sum_l binom(k, l) hbar^l (d^l f / dx^l) D^(k-l),

and the ``l``-sum ends by itself once ``d^l f`` vanishes under the degree cap.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Mapping

from .errors import BelowValidRangeError, DepthUnreachableError, NotMonicError
from .series import TSeries, VarSpace, format_coefficient, join_terms, monomial_text
from .zsymbol import gen_binomial

__all__ = ["PDOp", "compose", "rth_root", "project_residue", "commutator", "power"]


class PDOp:
    __slots__ = ("space", "cap", "coeffs", "low", "hbar", "one")

    def __init__(
        self,
        space: VarSpace,
        cap: int,
        coeffs: Mapping[int, TSeries] | None = None,
        low: int | None = None,
        hbar: Any = Fraction(1),
        one: Any = Fraction(1),
    ):
        self.space = space
        self.cap = cap
        self.low = low
        self.hbar = hbar
        self.one = one
        self.coeffs = {
            e: c for e, c in (coeffs or {}).items() if c and (low is None or e >= low)
        }

    def _like(self, coeffs: Mapping[int, TSeries], low: int | None) -> PDOp:
        return PDOp(self.space, self.cap, coeffs, low, self.hbar, self.one)

    @classmethod
    def d_power(cls, space: VarSpace, cap: int, k: int, hbar=Fraction(1), one=Fraction(1)) -> PDOp:
        return cls(space, cap, {k: TSeries.constant(space, cap, one)}, None, hbar, one)

    def from_series(self, c: TSeries, k: int = 0) -> PDOp:
        """``c * D^k`` in the same algebra as ``self``."""
        return self._like({k: c}, None)

    @property
    def top(self) -> int | None:
        return max(self.coeffs) if self.coeffs else None

    def zero_series(self) -> TSeries:
        return TSeries.zero(self.space, self.cap)

    def coefficient(self, e: int) -> TSeries:
        if self.low is not None and e < self.low:
            raise BelowValidRangeError(f"D^{e} requested, operator valid only down to D^{self.low}")
        return self.coeffs.get(e) or self.zero_series()

    __getitem__ = coefficient

    def is_monic(self) -> bool:
        t = self.top
        if t is None:
            return False
        c = self.coeffs[t]
        return set(c.terms) == {0} and c.terms[0] == self.one

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PDOp):
            return NotImplemented
        return self.coeffs.keys() == other.coeffs.keys() and all(
            self.coeffs[e] == other.coeffs[e] for e in self.coeffs
        )

    __hash__ = None  # type: ignore[assignment]

    def agrees_with(self, other: PDOp, down_to: int | None = None) -> bool:
        lows = [x for x in (self.low, other.low, down_to) if x is not None]
        bound = max(lows) if lows else None
        keys = {e for e in set(self.coeffs) | set(other.coeffs) if bound is None or e >= bound}
        z = self.zero_series()
        return all((self.coeffs.get(e) or z) == (other.coeffs.get(e) or z) for e in keys)

    def __add__(self, other: PDOp) -> PDOp:
        lows = [x for x in (self.low, other.low) if x is not None]
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out[e] + c if e in out else c
        return self._like(out, max(lows) if lows else None)

    def __neg__(self) -> PDOp:
        return self._like({e: -c for e, c in self.coeffs.items()}, self.low)

    def __sub__(self, other: PDOp) -> PDOp:
        return self + (-other)

    def scale(self, c) -> PDOp:
        return self._like({e: s.scale(c) for e, s in self.coeffs.items()}, self.low)

    def map_series(self, fn) -> PDOp:
        return self._like({e: fn(c) for e, c in self.coeffs.items()}, self.low)

    def __matmul__(self, other: PDOp) -> PDOp:
        return compose(self, other)

    def to_text(self, var: str = "Dx") -> str:
        pairs = []
        for e in sorted(self.coeffs, reverse=True):
            dmono = "" if e == 0 else (var if e == 1 else f"{var}^{e}")
            c = self.coeffs[e]
            if len(c) == 1:
                (exps, coeff), = c.items()
                if set(c.terms) == {0} and coeff == self.one:
                    pairs.append(("1", dmono))
                    continue
                mono = "*".join(x for x in (monomial_text(c.space.names, exps), dmono) if x)
                pairs.append((format_coefficient(coeff), mono))
            else:
                pairs.append((f"({c.to_text()})", dmono))
        text = join_terms(pairs)
        if self.low is not None:
            text += f" + O({var}^{self.low - 1})"
        return text

    def __repr__(self) -> str:
        return f"PDOp({self.to_text()})"


def _product_low(a: PDOp, b: PDOp) -> int | None:
    lows = []
    if a.low is not None and b.top is not None:
        lows.append(a.low + b.top)
    if b.low is not None and a.top is not None:
        lows.append(b.low + a.top)
    return max(lows) if lows else None


def compose(a: PDOp, b: PDOp, depth: int | None = None) -> PDOp:
    """``a o b``, keeping exponents that are valid and ``>= depth``."""
    a.zero_series()._check(b.zero_series())
    low = _product_low(a, b)
    if depth is not None:
        low = depth if low is None else max(low, depth)
    out: dict[int, TSeries] = {}
    hbar_pows = [a.one]
    for i, ai in a.coeffs.items():
        for j, bj in b.coeffs.items():
            d = bj
            l = 0
            while d:
                e = i + j - l
                if low is not None and e < low:
                    break
                if i >= 0 and l > i:
                    break
                c = gen_binomial(Fraction(i), l)
                while len(hbar_pows) <= l:
                    hbar_pows.append(hbar_pows[-1] * a.hbar)
                term = (ai * d).scale(hbar_pows[l] * c) if l else ai * d
                if term:
                    out[e] = out[e] + term if e in out else term
                l += 1
                d = d.derivative(0)
    return a._like(out, low)


def power(a: PDOp, n: int, depth: int | None = None) -> PDOp:
    if n < 1:
        raise ValueError("power needs n >= 1")
    result = a
    top = a.top or 0
    for k in range(n - 1):
        # factors still to come raise every exponent by up to their top degree
        step = None if depth is None else depth - (n - 2 - k) * top
        result = compose(result, a, step)
    return result


def rth_root(a: PDOp, depth: int) -> PDOp:
    """The unique ``X = D + x_0 + x_1 D^-1 + ...`` with ``X^r = a``, valid down to ``D^depth``.

    ``x_n`` is read off the ``D^(r-1-n)`` coefficient of ``X^r``, where it enters
    linearly as ``r * x_n``.
    """
    if not a.is_monic():
        raise NotMonicError("operator must have leading coefficient 1")
    r = a.top
    if r < 1:
        raise NotMonicError("top degree must be positive")
    n_max = 1 - depth
    if a.low is not None and r - 1 - (n_max - 1) < a.low:
        raise DepthUnreachableError(
            f"operator valid down to D^{a.low}; root down to D^{depth} is not determined"
        )
    root = a._like({1: TSeries.constant(a.space, a.cap, a.one)}, None)
    for n in range(n_max):
        target = r - 1 - n
        # root is exact here: it holds x_0..x_{n-1} with the tail set to zero
        approx = power(root, r, target)
        xn = (a.coefficient(target) - approx.coefficient(target)).scale(Fraction(1, r))
        coeffs = dict(root.coeffs)
        if xn:
            coeffs[-n] = xn
        root = root._like(coeffs, None)
    return root._like(root.coeffs, depth)


def project_residue(a: PDOp) -> tuple[PDOp, PDOp, TSeries]:
    if a.low is not None and a.low > 0:
        raise BelowValidRangeError(f"plus part needs D^0, operator valid down to D^{a.low}")
    plus = a._like({e: c for e, c in a.coeffs.items() if e >= 0}, None)
    minus = a._like({e: c for e, c in a.coeffs.items() if e < 0}, a.low)
    if a.low is not None and a.low > -1:
        raise BelowValidRangeError(f"residue needs D^-1, operator valid down to D^{a.low}")
    return plus, minus, a.coefficient(-1)


def plus_part(a: PDOp) -> PDOp:
    if a.low is not None and a.low > 0:
        raise BelowValidRangeError(f"plus part needs D^0, operator valid down to D^{a.low}")
    return a._like({e: c for e, c in a.coeffs.items() if e >= 0}, None)


def commutator(a: PDOp, b: PDOp, depth: int | None = None) -> PDOp:
    return compose(a, b, depth) - compose(b, a, depth)
