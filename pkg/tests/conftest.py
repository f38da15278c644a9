import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

# 12 points in the plane: rows 0-4 are the minority class (label 1)
TWELVE_X = np.array([
    [0, 0], [1, 0], [0, 1], [5, 5], [6, 5],
    [5, 6], [6, 6], [4, 5], [10, 0], [10, 1], [11, 0], [0, 10],
], dtype=float)
TWELVE_Y = np.array([1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0])


@pytest.fixture
def twelve():
    return TWELVE_X.copy(), TWELVE_Y.copy()


@pytest.fixture
def fixture_path():
    return lambda name: os.path.join(FIXTURES, name)


# -- acceptance criterion reporting ------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion a test belongs to")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when not in ("setup", "call"):
        return
    n, text = marker.args
    entry = _CRITERIA.setdefault(n, {"text": text, "ok": True, "tests": 0})
    if call.when == "call":
        entry["tests"] += 1
    if call.excinfo is not None:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        e = _CRITERIA[n]
        status = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status}  {e['text']} ({e['tests']} checks)")
