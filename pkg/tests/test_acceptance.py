"""Acceptance criteria, each run at zero tolerance (exact rational equality).

Every criterion maps to one or more suites.  The test records a one-line
verdict that the terminal summary prints, then asserts that every fatal
record passed within the time budget.
"""

import time

import pytest

from algebroid_index.checks import Config
from algebroid_index.suites import run_suite

CRITERIA = [
    (1, ("normalization",), 10),
    (2, ("moyal",), 60),
    (3, ("homological",), 120),
    (4, ("cocycle",), 300),
    (5, ("local-rr",), 600),
    (6, ("pbw",), 120),
    (7, ("depconn",), 120),
    (8, ("fedosov", "mc"), 120),
    (9, ("character",), 600),
    (10, ("index",), 600),
    (11, ("chern-weil",), 60),
]


@pytest.mark.parametrize("number, suites, budget", CRITERIA, ids=[f"criterion-{c[0]}" for c in CRITERIA])
def test_criterion(number, suites, budget, acceptance_lines):
    start = time.perf_counter()
    reports = [run_suite(name, Config()) for name in suites]
    elapsed = time.perf_counter() - start
    failed = sorted({r.check for rep in reports for r in rep.records if r.fatal and not r.equal})
    nonfatal = sorted({r.check for rep in reports for r in rep.records if not r.fatal and not r.equal})
    ok = not failed and elapsed <= budget
    checks = sum(len(rep.records) for rep in reports)
    line = f"criterion {number} ({'+'.join(suites)}): {'PASS' if ok else 'FAIL'} {checks} records, {elapsed:.1f}s of {budget}s"
    if failed:
        line += "; failing: " + ", ".join(failed)
    if nonfatal:
        line += "; non-fatal failures: " + ", ".join(nonfatal)
    acceptance_lines.append(line)
    assert not failed, line
    assert elapsed <= budget, line
