from fractions import Fraction

import pytest

from rspin.errors import BelowValidRangeError, DepthUnreachableError, NotMonicError
from rspin.series import TSeries, VarSpace
from rspin.zsymbol import ZSymbol, fractional_power, gen_binomial, mul, poisson, residue, split

S = VarSpace.T(3)
CAP = 4


def kdv_seed():
    return ZSymbol(S, CAP, {2: TSeries.constant(S, CAP, 1), 0: TSeries.var(S, CAP, 0, 2)})


def test_gen_binomial():
    assert gen_binomial(Fraction(1, 2), 2) == Fraction(-1, 8)
    assert gen_binomial(Fraction(5), 2) == 10


def test_square_root_text():
    root = fractional_power(kdv_seed(), 1, -3)
    assert root.to_text() == "z + T1*z^-1 - 1/2*T1^2*z^-3 + O(z^-4)"


def test_power_round_trip():
    L = kdv_seed()
    root = fractional_power(L, 1, -4)
    assert mul(root, root, 0).agrees_with(L, 0)
    cube = fractional_power(L, 3, -1)
    assert cube.agrees_with(mul(fractional_power(L, 1, -3), L, -1), -1)


def test_residue_of_three_halves():
    # res (z^2 + u)^(3/2) = 3/8 u^2
    assert residue(fractional_power(kdv_seed(), 3, -1)) == TSeries.var(S, CAP, 0, 2) ** 2 * Fraction(3, 8)


def test_guards():
    not_monic = ZSymbol(S, CAP, {2: TSeries.constant(S, CAP, 2)})
    with pytest.raises(NotMonicError):
        fractional_power(not_monic, 1, -2)
    partial = fractional_power(kdv_seed(), 1, -1)
    with pytest.raises(BelowValidRangeError):
        partial.coefficient(-2)
    with pytest.raises(DepthUnreachableError):
        fractional_power(partial.shift(1), 1, -5)


def test_split_and_poisson():
    L = kdv_seed()
    plus, minus = split(fractional_power(L, 3, -2))
    assert plus.top == 3 and minus.top == -1
    x = ZSymbol(S, CAP, {0: TSeries.var(S, CAP, 0)})
    z = ZSymbol.z_power(S, CAP, 1)
    # {z, x} = 1
    assert poisson(z, x) == ZSymbol.z_power(S, CAP, 0)


@pytest.mark.parametrize("r", [2, 3, 4])
def test_poisson_fixation(r):
    # {z^(r-1), z^r + r x} = r (r-1) z^(r-2)
    a = ZSymbol.z_power(S, CAP, r - 1)
    b = ZSymbol.z_power(S, CAP, r) + ZSymbol(S, CAP, {0: TSeries.var(S, CAP, 0, r)})
    assert poisson(a, b) == ZSymbol.z_power(S, CAP, r - 2, Fraction(r * (r - 1)))
