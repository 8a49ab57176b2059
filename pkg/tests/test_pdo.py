from fractions import Fraction

import pytest

from rspin.errors import NotMonicError
from rspin.pdo import PDOp, commutator, compose, plus_part, power, project_residue, rth_root
from rspin.series import TSeries, VarSpace

S = VarSpace.T(3)
CAP = 4


def op(coeffs, low=None):
    return PDOp(S, CAP, {e: c if isinstance(c, TSeries) else TSeries.constant(S, CAP, c) for e, c in coeffs.items()}, low)


T1 = TSeries.var(S, CAP, 0)


def test_leibniz_rule():
    d = PDOp.d_power(S, CAP, 1)
    f = op({0: T1 ** 2})
    assert compose(d, f).to_text() == "T1^2*Dx + 2*T1"


def test_inverse_derivative():
    dinv = PDOp.d_power(S, CAP, -1)
    f = op({0: T1 ** 2})
    assert compose(dinv, f, -3).to_text() == "T1^2*Dx^-1 - 2*T1*Dx^-2 + 2*Dx^-3 + O(Dx^-4)"


def test_square_root():
    L = op({2: 1, 0: T1.scale(2)})
    root = rth_root(L, -3)
    assert root.to_text() == "Dx + T1*Dx^-1 - 1/2*Dx^-2 - 1/2*T1^2*Dx^-3 + O(Dx^-4)"
    assert power(root, 2, 0).agrees_with(L, 0)


def test_cube_root_round_trip():
    T2 = TSeries.var(S, CAP, 1)
    L = op({3: 1, 1: T2.scale(3), 0: T1.scale(3)})
    root = rth_root(L, -4)
    assert power(root, 3, -1).agrees_with(L, -1)


def test_plus_part_and_residue():
    L = op({2: 1, 0: T1.scale(2)})
    plus, minus, res = project_residue(power(rth_root(L, -3), 3, -1))
    assert plus.top == 3
    assert res == (T1 ** 2).scale(Fraction(3, 2))
    # [L^(3/2)_+, L] has no differential part
    c = commutator(plus_part(plus), L)
    assert set(c.coeffs) <= {0}


def test_root_needs_monic():
    with pytest.raises(NotMonicError):
        rth_root(op({2: 2}), -2)
