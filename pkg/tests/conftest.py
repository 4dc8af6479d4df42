"""Shared fixtures plus a one-line-per-criterion acceptance summary."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_marked: dict[str, tuple[int, str]] = {}
_outcomes: dict[int, tuple[bool, str]] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(num, desc): tags a test as an acceptance criterion"
    )


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None:
            _marked[item.nodeid] = (int(marker.args[0]), str(marker.args[1]))


def pytest_runtest_logreport(report):
    info = _marked.get(report.nodeid)
    if info is None:
        return
    num, desc = info
    passed_so_far, _ = _outcomes.get(num, (True, desc))
    if report.when == "call":
        _outcomes[num] = (passed_so_far and report.passed, desc)
    elif report.failed:
        _outcomes[num] = (False, desc)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_outcomes):
        passed, desc = _outcomes[num]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {num:>2}: {status} - {desc}")
