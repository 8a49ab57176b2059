from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rspin.errors import BadVarError, CapExceededError, OutOfCapError, SpaceMismatchError
from rspin.series import TSeries, VarSpace, substitute_linear, substitute_series

S3 = VarSpace.T(3)


def poly(data, cap=4, space=S3):
    return TSeries.from_dict(space, cap, data)


small = st.dictionaries(
    st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2)),
    st.integers(-5, 5).map(Fraction),
    max_size=6,
).map(poly)


def test_truncated_product():
    x = TSeries.var(S3, 3, 0)
    y = TSeries.var(S3, 3, 1)
    p = (x + y) ** 4
    assert not p
    assert ((x + 1) ** 3).coefficient((3, 0, 0)) == 1
    assert ((x + 1) ** 5).coefficient((3, 0, 0)) == 10


def test_coefficient_beyond_cap():
    with pytest.raises(OutOfCapError):
        poly({(1, 0, 0): 1}, cap=2).coefficient((2, 1, 0))


def test_space_mismatch():
    with pytest.raises(SpaceMismatchError):
        poly({(1, 0, 0): 1}, cap=2) + poly({(1, 0, 0): 1}, cap=3)


def test_derivative_and_text():
    p = poly({(2, 1, 0): Fraction(1, 2), (0, 0, 1): -3})
    assert p.derivative(0) == poly({(1, 1, 0): 1})
    assert p.to_text() == "-3*T3 + 1/2*T1^2*T2"


def test_labels():
    t = VarSpace.t(3, 6, ("s",))
    assert t.names == ("t0_0", "t1_0", "t2_0", "t0_1", "t1_1", "t2_1", "s")
    assert t.label_index((2, 1)) == 5
    with pytest.raises(BadVarError):
        t.index("q")


def test_linear_substitution_shift():
    # x -> x - 2y applied to x^2
    p = poly({(2, 0, 0): 1})
    q = substitute_linear(p, {0: (Fraction(1), 1, Fraction(-2))})
    assert q == poly({(2, 0, 0): 1, (1, 1, 0): -4, (0, 2, 0): 4})


def test_substitute_series_constant_guard():
    p = poly({(2, 0, 0): 1}, cap=2)
    one_plus_x = TSeries.constant(S3, 2, 1) + TSeries.var(S3, 2, 0)
    with pytest.raises(CapExceededError):
        substitute_series(p, {0: one_plus_x})


@settings(max_examples=60, deadline=None)
@given(small, small, small)
def test_ring_laws(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == TSeries.zero(S3, 4)


@settings(max_examples=60, deadline=None)
@given(small, small)
def test_leibniz(a, b):
    lhs = (a * b).derivative(1)
    rhs = a.derivative(1) * b + a * b.derivative(1)
    assert lhs.truncate(3) == rhs.truncate(3)
