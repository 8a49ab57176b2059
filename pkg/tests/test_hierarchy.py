from fractions import Fraction

import pytest

from rspin.errors import CapExceededError, BadIndexError, BelowValidRangeError
from rspin.hierarchy import (
    bell_by_recursion,
    build_L0,
    build_L_dispersive,
    build_phi0,
    build_phi_dispersive,
    check_flows_L0,
    check_flows_dispersive,
    dispersive_layer,
    dispersive_text,
    faa_di_bruno,
    string_defect,
    two_point_closed,
    v_coords,
    weight,
)
from rspin.series import TSeries, VarSpace


def derivative_at_zero(series, *indices):
    """``d^k series / dT_i1 ... dT_ik`` at the origin."""
    exps = [0] * series.space.count
    for i in indices:
        exps[i - 1] += 1
    mult = 1
    for e in exps:
        for k in range(2, e + 1):
            mult *= k
    return series.coefficient(tuple(exps)) * mult


def test_kdv_jet():
    L0 = build_L0(2, 3, 4)
    assert L0.to_text() == "z^2 + (2*T1 + 6*T1*T3 + 18*T1*T3^2)"
    assert check_flows_L0(L0) is None


@pytest.mark.parametrize("r", [2, 3, 4, 5])
def test_phi0_values(r):
    N = 2 * r
    phi = build_phi0(r, 3, N, build_L0(r, 2, N)).series
    assert derivative_at_zero(phi, 1, r) == r
    assert derivative_at_zero(phi, 2, r - 1) == 2 * (r - 1)
    assert derivative_at_zero(phi, 2, r, r) == 2 * r * r


def test_phi0_weights_and_string():
    r, N = 3, 6
    phi = build_phi0(r, 4, N, build_L0(r, 3, N)).series
    assert all(weight(r, e) == r + 1 for e, _ in phi.items())
    assert not string_defect(phi, r)
    assert not phi.set_to_zero(range(1, N))


def test_two_point():
    L0 = build_L0(2, 3, 4)
    V = v_coords(2, 6)
    tp = two_point_closed(1, 1, L0, V)
    assert tp.truncate(2).to_text() == "T1 + 3*T1*T3"
    assert not two_point_closed(2, 1, L0, V)
    L3 = build_L0(3, 3, 6)
    V3 = v_coords(3, 9)
    assert two_point_closed(1, 2, L3, V3) == two_point_closed(2, 1, L3, V3)
    with pytest.raises(BadIndexError):
        two_point_closed(1, 3, L3, V3)


def test_v_coords_round_trip():
    for r in (2, 3, 4, 5):
        assert v_coords(r, 2 * r).round_trip()


def test_caps_are_enforced():
    L0 = build_L0(3, 2, 6)
    with pytest.raises(CapExceededError):
        build_phi0(3, 5, 6, L0)
    with pytest.raises(CapExceededError):
        two_point_closed(1, 1, L0, v_coords(3, 9), cap=4)


def test_dispersive_seed_text():
    assert dispersive_text(build_L_dispersive(3, 1, 3, 1)).startswith("Dx^3")
    L = build_L_dispersive(3, 1, 6, 1)
    L.symbol = L.symbol.map_series(lambda c: c.set_to_zero(range(1, 6)))
    assert dispersive_text(L) == "Dx^3 + 3*e^-3*T1"


@pytest.mark.parametrize("r", [2, 3])
def test_dispersive_leading_layer(r):
    N, cap = 2 * r, 3
    L = build_L_dispersive(r, cap, N, 1)
    L0 = build_L0(r, cap, N)
    assert check_flows_dispersive(L) is None
    for i in range(r - 1):
        assert dispersive_layer(L, i, 0) == L0.f(i)
    with pytest.raises(CapExceededError):
        dispersive_layer(L, 0, 2)
    phi = build_phi_dispersive(r, cap + 1, N, 1, L)
    assert phi.layer(0) == build_phi0(r, cap + 1, N, L0).series
    assert all(weight(r, e) == 0 for e, _ in phi.layer(1).items())


def test_kdv_genus_one_correction():
    # u = u0 + eps^2/12 (log u0_x)_xx for L = d^2 + u
    cap = 5
    L = build_L_dispersive(2, cap, 6, 2)
    u2 = dispersive_layer(L, 0, 2)
    u0 = build_L0(2, cap + 2, 6).f(0)
    c = cap + 2
    w = u0.derivative(0).scale(Fraction(1, 2)) - 1
    log, p = TSeries.zero(u0.space, c), TSeries.constant(u0.space, c, 1)
    for k in range(1, c + 1):
        p = p * w
        log = log + p.scale(Fraction((-1) ** (k + 1), k))
    expected = log.derivative(0).derivative(0).scale(Fraction(1, 12)).truncate(cap - 2)
    assert u2.truncate(cap - 2) == expected
    assert u2.to_text() == "75/2*T5^2 + 450*T3*T5^2"


def test_faa_di_bruno_matches_recursion():
    S = VarSpace.T(3)
    psi = TSeries.from_dict(S, 6, {(2, 0, 0): Fraction(1, 2), (1, 1, 0): 3, (3, 0, 1): -1})
    eps = Fraction(1)
    ys, d = [], psi
    for _ in range(5):
        d = d.derivative(0)
        ys.append(d)
    rec = bell_by_recursion(5, psi, eps)
    for i in range(6):
        # each derivative lowers the degree, so compare below the polluted top
        assert faa_di_bruno(i, ys).truncate(6 - i) == rec[i].truncate(6 - i)


def test_plus_part_requires_range():
    L0 = build_L0(2, 2, 4)
    with pytest.raises(BelowValidRangeError):
        L0.fractional_power(3, 1).coefficient(0)
