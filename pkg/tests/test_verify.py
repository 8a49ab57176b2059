import pytest

from rspin import correlators as C
from rspin.verify import SUITES, corrupt_jet, dispersive_checks, run_suite


@pytest.mark.parametrize("name", sorted(SUITES))
def test_suites_pass_r2(get_engine, name):
    result = run_suite(name, get_engine(2, 6, 2))
    assert result.passed, result.line()
    assert result.line().startswith("PASS")


@pytest.mark.parametrize("name", ["strings", "flows", "homogeneity", "ramond", "lax"])
def test_suites_pass_r3(get_engine, name):
    result = run_suite(name, get_engine(3, 6, 2))
    assert result.passed, result.line()


def test_dispersive_checks_r4():
    bad = [(label, p) for label, p in dispersive_checks(4, 2) if p is not None]
    assert not bad


def test_corrupted_jet_is_caught():
    engine = C.Engine(3, 5, 1)
    corrupt_jet(engine)
    result = run_suite("flows", engine)
    assert not result.passed
    label, problem = result.first_failure
    assert "flow T_" in problem
    assert result.line().startswith("FAIL flows")


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope", C.Engine(2, 3, 0))
