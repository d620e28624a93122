import pytest

from algebroid_index.checks import CHECKS, Config
from algebroid_index.suites import SuiteError, load_suites, min_order, run_suite, suite_entries

SUITES = load_suites()


@pytest.mark.parametrize("name", sorted(SUITES))
def test_every_entry_is_a_registered_check(name):
    assert all(e.check in CHECKS for e in suite_entries(name))


def test_all_covers_every_other_suite():
    everything = {e.check for e in suite_entries("all")}
    for name in SUITES:
        assert {e.check for e in suite_entries(name)} <= everything


def test_only_the_stretch_goal_is_non_fatal():
    assert [e.check for e in suite_entries("all") if not e.fatal] == ["tau4-c4"]


def test_unknown_suite():
    with pytest.raises(SuiteError):
        suite_entries("nope")


def test_unknown_check_in_suite():
    with pytest.raises(SuiteError):
        suite_entries("x", {"x": {"checks": ["no-such-check"]}})


def test_order_below_minimum_is_refused():
    assert min_order("all") == 2
    with pytest.raises(SuiteError):
        run_suite("pbw", Config(order=1))


def test_report_layout():
    report = run_suite("normalization", Config())
    lines = report.lines()
    assert report.passed
    assert '"summary": "normalization"' in lines[-1]
    assert all(r.check in ("tau2-c2", "tau4-c4") for r in report.records)
