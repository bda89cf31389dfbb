import numpy as np
import pytest

from pfpenalty.model import MaterialSpec


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_material():
    return MaterialSpec(1.0, 0.2, 1.0, 0.02)


# one line per acceptance criterion, printed after the test summary
_CRITERIA = {}


@pytest.fixture
def criterion(request):
    """``criterion(number, passed, detail)`` records the verdict of one criterion."""
    def record(number, passed, detail=""):
        _CRITERIA[number] = (bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
