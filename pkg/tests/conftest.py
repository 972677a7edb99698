from __future__ import annotations

from collections import defaultdict

import pytest

# criterion number -> (title, [(test name, outcome)])
_acceptance: dict[int, tuple[str, list[tuple[str, str]]]] = {}
_markers: dict[str, tuple[int, str]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None:
            number, title = mark.args
            _markers[item.nodeid] = (number, title)
            _acceptance.setdefault(number, (title, []))


def pytest_runtest_logreport(report):
    if report.nodeid not in _markers:
        return
    if report.when == "call" or report.outcome != "passed":
        number, _ = _markers[report.nodeid]
        _acceptance[number][1].append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_acceptance):
        title, results = _acceptance[number]
        by_outcome = defaultdict(list)
        for name, outcome in results:
            by_outcome[outcome].append(name)
        if not results:
            verdict = "NOT RUN"
        elif by_outcome["failed"]:
            verdict = "FAIL"
        elif by_outcome["skipped"] and not by_outcome["passed"]:
            verdict = "SKIPPED"
        else:
            verdict = "PASS"
        line = f"[{verdict}] {number}. {title}"
        if by_outcome["failed"]:
            line += f"  (failing: {', '.join(by_outcome['failed'])})"
        tr.write_line(line)


@pytest.fixture(scope="session")
def exact():
    from seqcert.kernel import EXACT

    return EXACT
