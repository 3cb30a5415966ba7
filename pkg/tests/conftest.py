"""Shared test setup and the acceptance-criteria report.

Tests marked ``@pytest.mark.acceptance("<criterion>")`` are grouped by
criterion; at the end of the run one PASS/FAIL line is printed for each,
plus one for the total suite runtime.
"""

import os
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(__file__))

SUITE_BUDGET_SECONDS = 600.0
SUITE_CRITERION = "Full test suite completes in under 10 minutes"

_results = {}
_start = [0.0]


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(criterion): test backs the named acceptance criterion")
    _start[0] = time.perf_counter()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    name = marker.args[0]
    report = outcome.get_result()
    ok = _results.setdefault(name, True)
    if report.failed or (report.when == "call" and report.skipped):
        ok = False
    _results[name] = ok


def pytest_sessionfinish(session, exitstatus):
    session.config._suite_elapsed = time.perf_counter() - _start[0]
    if _results and session.config._suite_elapsed >= SUITE_BUDGET_SECONDS:
        session.exitstatus = pytest.ExitCode.TESTS_FAILED


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name, ok in _results.items():
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
    elapsed = getattr(config, "_suite_elapsed", time.perf_counter() - _start[0])
    ok = elapsed < SUITE_BUDGET_SECONDS
    tr.write_line(f"{'PASS' if ok else 'FAIL'}  {SUITE_CRITERION} ({elapsed:.1f} s)")
