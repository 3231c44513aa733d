from collections import defaultdict

import pytest

_criteria = defaultdict(list)
_titles = {}


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            n, title = marker.args
            _titles[n] = title
            item.user_properties.append(("criterion", n))


def pytest_runtest_logreport(report):
    for key, value in report.user_properties:
        if key == "criterion" and (report.when == "call" or report.failed):
            _criteria[value].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        ok = all(_criteria[n])
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {_titles[n]}")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20261015)
