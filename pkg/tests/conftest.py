"""Shared pytest configuration: per-criterion reporting for the acceptance suite.

Acceptance tests carry ``@pytest.mark.criterion(n, "title")`` and attach a
one-line ``detail`` with ``record_property``. After the run, one PASS/FAIL
line per criterion is printed in the terminal summary.
"""

import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    number, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    if not detail and rep.failed:
        detail = str(rep.longrepr).strip().splitlines()[-1]
    prev = _RESULTS.get(number)
    passed = rep.passed and (prev is None or prev[1])
    details = detail if prev is None else f"{prev[2]}; {detail}"
    _RESULTS[number] = (title, passed, details)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, passed, detail = _RESULTS[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2} [{status}] {title}: {detail}")
