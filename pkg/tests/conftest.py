import numpy as np
import pytest

from helpers import make_graph

_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(name, passed, detail)``."""

    def record(name, passed, detail=""):
        _ACCEPTANCE.append((name, "PASS" if passed else "FAIL", detail))
        return passed

    return record


@pytest.fixture
def skip_criterion():
    def record(name, reason):
        _ACCEPTANCE.append((name, "SKIP", reason))
        pytest.skip(reason)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"[{status}] {name}" + (f" -- {detail}" if detail else ""))


@pytest.fixture
def triangle():
    return make_graph(3, [(0, 1), (1, 2), (0, 2)], [[0, 1, 2], [3, 4, 5], [6, 7, 8]])
