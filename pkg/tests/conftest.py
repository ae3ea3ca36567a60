"""Shared test configuration.

Tests marked ``@pytest.mark.criterion(k, "title")`` are acceptance criteria;
their outcomes are collected and printed as one PASS/FAIL line each at the
end of the session.
"""

import sys
from pathlib import Path

import pytest

# make the helper modules (oracles, synthetic) importable from every test file
sys.path.insert(0, str(Path(__file__).parent))

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    k, title = mark.args
    prev = _results.get(k, (title, "PASS", 0.0))
    status = prev[1]
    if report.failed:
        status = "FAIL"
    elif report.skipped and report.when == "setup":
        status = "SKIP"
    _results[k] = (title, status, prev[2] + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_results):
        title, status, secs = _results[k]
        terminalreporter.write_line(f"criterion {k}: {status:4s} {title} ({secs:.2f} s)")
