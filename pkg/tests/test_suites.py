import pytest

from gzverify.suites import SUITES, Check, SuiteConfig, close, exact, run_suite

FAST = ["numerics", "quadfield", "lattice", "weil", "modforms", "cycles", "greens"]


@pytest.mark.parametrize("name", FAST)
def test_fast_suites_pass(name):
    checks = run_suite(name, SuiteConfig())
    assert checks and all(c.passed for c in checks), [c for c in checks if not c.passed]
    assert [c.id for c in checks] == sorted(c.id for c in checks)
    assert all(c.id.startswith(name + ".") for c in checks)


def test_classnumber_suite_small_range():
    checks = run_suite("classnumber", SuiteConfig(max_disc=60))
    assert len(checks) == 39 and all(c.passed for c in checks)


def test_check_helpers():
    assert close("a", "", 1.0, 1.0 + 1e-9, 1e-8).passed
    assert not close("a", "", 1.0, float("nan"), 1.0).passed
    assert exact("b", "", 3, 3).passed and not exact("b", "", 3, 4).passed
    assert isinstance(exact("b", "", 3, 3), Check)


def test_registry():
    assert set(FAST) | {"classnumber", "gz37", "lfunc"} == set(SUITES)
