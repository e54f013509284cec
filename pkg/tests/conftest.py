import numpy as np
import pytest

from waterspin import WATER, build_eigentable

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def table12():
    return build_eigentable(WATER, 12)


@pytest.fixture(scope="session")
def table6():
    return build_eigentable(WATER, 6)


@pytest.fixture(scope="session")
def default_grid():
    return np.round(np.arange(1001) * 0.005, 12)


@pytest.fixture
def record():
    def _record(number: int, ok: bool, detail: str):
        ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
