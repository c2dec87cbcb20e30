"""Prints one line per acceptance criterion at the end of the session."""

import re

_CRITERIA = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2))
    if report.when == "call" or report.outcome != "passed":
        _CRITERIA[key] = "PASS" if report.passed else report.outcome.upper()


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (n, name), outcome in sorted(_CRITERIA.items()):
        terminalreporter.write_line(f"criterion {n:2d} {name.replace('_', ' '):32s} {outcome}")
