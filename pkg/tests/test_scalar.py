from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rspin.errors import EpsWindowError, MixedRError, NotMonomialUnitError, NotRationalError
from rspin.scalar import (
    EpsScalar,
    Scalar,
    as_rational,
    format_rational,
    invert_unit,
    lambda_pow,
    ring_arith,
    sqrt_minus_r,
)

fractions = st.builds(Fraction, st.integers(-20, 20), st.integers(1, 12))


def scalars(r):
    return st.lists(fractions, min_size=2 * (r + 1), max_size=2 * (r + 1)).map(lambda cs: Scalar(r, cs))


def test_defining_relation():
    for r in range(2, 7):
        assert lambda_pow(r, 2 * (r + 1)) == -r
        assert sqrt_minus_r(r) ** 2 == -r


def test_negative_powers():
    assert lambda_pow(3, -1) * lambda_pow(3, 1) == 1
    assert lambda_pow(3, -8) == Fraction(-1, 3)
    assert lambda_pow(2, -13) * lambda_pow(2, 13) == 1


def test_invert_unit():
    u = lambda_pow(4, 3) * Fraction(2, 5)
    assert u * invert_unit(u) == 1
    with pytest.raises(NotMonomialUnitError):
        invert_unit(Scalar(4, [1, 1]))


def test_as_rational():
    assert as_rational(lambda_pow(3, 8)) == -3
    assert as_rational(Fraction(1, 2)) == Fraction(1, 2)
    with pytest.raises(NotRationalError):
        as_rational(lambda_pow(3, 1))


def test_ring_arith_dispatch():
    a, b = Scalar(2, [1, 2]), Scalar(2, [0, 1])
    assert ring_arith(a, b, "add") == Scalar(2, [1, 3])
    assert ring_arith(a, b, "mul") == Scalar(2, [0, 1, 2])
    assert ring_arith(a, None, "neg") == -a
    with pytest.raises(MixedRError):
        ring_arith(a, Scalar(3, [1]), "add")


def test_text():
    assert str(Scalar(3, [1, 0, -2])) == "1 - 2*L^2"
    assert format_rational(Fraction(-1, 3)) == "-1/3"


@settings(max_examples=40, deadline=None)
@given(scalars(2), scalars(2), scalars(2))
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a


@given(st.integers(-30, 30), st.integers(-30, 30))
def test_lambda_exponents_add(j, k):
    assert lambda_pow(3, j) * lambda_pow(3, k) == lambda_pow(3, j + k)


def test_eps_window():
    e = EpsScalar.eps(0, 2, 1)
    assert (e * e).layer(2) == 1
    assert (e * e * e).truncated and not (e * e * e)
    with pytest.raises(EpsWindowError):
        EpsScalar(0, 2, {0: 1}).shift(-1)
    assert EpsScalar(0, 2, {1: 3}).shift(-1).layer(0) == 3
