from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rspin import correlators as C
from rspin.errors import CapExceededError, MalformedKeyError, TwoMinusOneInsertionsError, UnmappedVariableError
from rspin.scalar import Scalar, lambda_pow
from rspin.series import TSeries, VarSpace


# -- keys and the change of variables ------------------------------------------


def test_key_normalizes_and_validates():
    k = C.CorrelatorKey(3, "extended", ((2, 0), (1, 1)))
    assert k.insertions == ((1, 1), (2, 0))
    assert k.text() == "<tau^-1_0 tau^1_1 tau^2_0>"
    with pytest.raises(MalformedKeyError):
        C.CorrelatorKey(3, "extended", ((3, 0),))
    with pytest.raises(MalformedKeyError):
        C.CorrelatorKey(3, "weird", ())
    with pytest.raises(TwoMinusOneInsertionsError):
        C.CorrelatorKey(3, "extended", ((-1, 0), (1, 0)))
    with pytest.raises(MalformedKeyError):
        C.CorrelatorKey(3, "closed", ((0, 0),), 2)


def test_change_of_variables_factors():
    assert C.ChangeOfVars(2, 6).factor(1) == (1, 0)
    assert C.ChangeOfVars(3, 6).factor(1) == (1, 1)
    # T_4 = t^0_1 / (L^(12-4-8) * 1*4) for r = 3
    assert C.ChangeOfVars(3, 6).factor(4) == (Fraction(1, 4), 0)
    # Ramond: T_3 = t^2_0 / (L^1 * 1! * 3)
    assert C.ChangeOfVars(3, 6).factor(3) == (Fraction(1, 3), -1)
    with pytest.raises(UnmappedVariableError):
        C.ChangeOfVars(3, 6).factor(7)


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.tuples(*[st.integers(0, 2)] * 6), st.integers(-9, 9).map(Fraction), max_size=5))
def test_change_round_trip(data):
    F = TSeries.from_dict(VarSpace.T(6), 4, data)
    cov = C.ChangeOfVars(3, 6)
    back = C.to_T_variables(C.to_t_variables(F, cov), cov)
    assert back == F.map_coeffs(lambda q: Scalar.rational(3, q))


def test_extraction_convention():
    space = VarSpace.t(2, 2)
    F = TSeries.from_dict(space, 3, {(2, 0): Fraction(1, 2), (1, 1): 3})
    assert C.extract_correlator(F, C.CorrelatorKey(2, "closed", ((0, 0), (0, 0)))) == 1
    assert C.extract_correlator(F, C.CorrelatorKey(2, "closed", ((0, 0), (1, 0)))) == 3
    with pytest.raises(CapExceededError):
        C.extract_correlator(F, C.CorrelatorKey(2, "closed", ((0, 0),) * 4))


def test_dimension_gates():
    assert C.extended_dimension_ok(3, [(1, 0), (1, 0)])
    assert not C.extended_dimension_ok(3, [(1, 0), (0, 0)])
    assert C.closed_dimension_ok(4, [(1, 0), (0, 0), (1, 0)])
    assert C.open_dimension_ok(2, [], 3)
    assert not C.open_dimension_ok(2, [], 2)


# -- values ----------------------------------------------------------------------


@pytest.mark.parametrize("r", [2, 3, 4, 5])
def test_base_values(get_engine, r):
    E = get_engine(r, r + 1, 0)
    for value in (E.extended, E.hierarchy_extended):
        assert value([(1, 0), (r - 2, 0)] if r > 2 else [(1, 0), (0, 0)]) == 1
        assert value([(1, 0), (r - 1, 0), (r - 1, 0)]) == Fraction(-1, r)
        assert value([(0, 0), (r - 1, 0)]) == 1
        for a in range(r):
            assert value([(a, 0)] + [(r - 1, 0)] * (a + 1)) == C.x_value(r, a)


def test_known_values(get_engine):
    E3 = get_engine(3, 6, 2)
    assert E3.extended([(2, 0)] * 4) == Fraction(2, 9)
    assert E3.closed([(1, 0), (0, 0), (0, 0)]) == 1
    assert E3.closed([(0, 0), (0, 0), (2, 0)]) == 0
    E2 = get_engine(2, 6, 2)
    assert E2.extended([(1, 0)] * 3) == Fraction(-1, 2)
    assert E2.closed([(0, 0)] * 3) == 1
    assert E2.open([], 3) == -2
    assert E2.open([(0, 0)], 0) == 0


def test_extended_potential_is_rational(get_engine):
    F = get_engine(4, 6, 2).F_ext
    assert all(isinstance(c, Fraction) for c in F.terms.values())


def test_open_potential_has_no_s_free_part(get_engine):
    F = get_engine(3, 6, 2).F_open
    s = F.space.count - 1
    assert not F.filter(lambda e: e[s] == 0)


def test_cap_errors(get_engine):
    E = get_engine(3, 4, 1)
    with pytest.raises(CapExceededError):
        E.hierarchy_extended([(0, 0)] * 5)
    with pytest.raises(CapExceededError):
        E.hierarchy_extended([(0, 2), (1, 0)])


def test_table_provenance():
    t = C.CorrelatorTable()
    k = C.CorrelatorKey(3, "extended", ((1, 0), (1, 0)))
    t.record(k, Fraction(1), "recursion")
    assert t.provenance[k] == "recursion"
    t.record(k, Fraction(1), "hierarchy")
    assert t.provenance[k] == "both-agree" and t.value(k) == 1
    k2 = C.CorrelatorKey(3, "extended", ((2, 0), (0, 0)))
    t.record(k2, Fraction(1), "recursion")
    t.record(k2, Fraction(2), "hierarchy")
    assert t.poisoned == [k2]


def test_multisets_counts():
    assert len(list(C.multisets(2, 2, 0))) == 1 + 2 + 3
    assert all(sum(d for _, d in m) <= 1 for m in C.multisets(3, 3, 1))


# -- cross-checks and properties ---------------------------------------------------


@pytest.mark.parametrize("r", [2, 3])
def test_crosscheck(get_engine, r):
    report = get_engine(r, 6, 2).crosscheck()
    assert report.ok, report.summary()
    assert report.nonzero() > 10


def test_lax_identity_r2_text(get_engine):
    ok, bad = C.lax_identity(get_engine(2, 6, 2), 4)
    assert ok, bad


def test_trr_choices_and_specialized(get_engine):
    E = get_engine(3, 5, 2)
    assert C.check_trr_choices(E) is None
    assert C.check_specialized_trrs(E) is None
    assert C.check_minus_one_trr(E) is None


def test_string_equations(get_engine):
    E = get_engine(3, 6, 2)
    assert C.check_string(E, "hierarchy") is None
    assert C.check_string(E, "recursion") is None


def test_open_relations(get_engine):
    E = get_engine(2, 5, 2)
    assert C.check_open_dictionary(E) is None
    assert C.check_open_trrs(E) is None


def test_minus_one_descendents(get_engine):
    mo = C.MinusOneDescendents(get_engine(3, 6, 2))
    assert mo.value(1, [(0, 0), (0, 0), (0, 0), (2, 1)]) == 2
    assert mo.value(1, [(0, 0), (1, 0)]) == 0


def test_lambda_transport_example():
    # a lone T_1 for r = 3 becomes L * t^0_0
    F = TSeries.var(VarSpace.T(3), 2, 0)
    G = C.to_t_variables(F, C.ChangeOfVars(3, 3))
    assert G.coefficient((1, 0, 0)) == lambda_pow(3, 1)


def test_open_trr2_shifted_boundary_fails(get_engine):
    # the same relation with sigma^(m2+1) on the right must break somewhere
    from math import comb

    E = get_engine(2, 5, 2)
    broken = 0
    for ins in C.multisets(2, 4, 2, 1):
        for m in range(1, 5 - len(ins) + 1):
            for i, (a, d) in enumerate(ins):
                if not d:
                    continue
                others = [x for p, x in enumerate(ins) if p != i]
                total = C._open_first_sum(E, (a, d - 1), others, m, [])
                for I, J in C._split_subsets(others):
                    for m1 in range(m):
                        total += comb(m - 1, m1) * E.open([(a, d - 1)] + I, m1) * E.open(J, m - m1)
                assert C.open_trr2(E, ins, m, i) == E.open(ins, m)
                broken += total != E.open(ins, m)
    assert broken
