import pytest

from quantal.events import make_space
from quantal.measure import MeasureSpec, enumerate_precluded


@pytest.fixture
def slit_space():
    return make_space(["A", "B", "C"])


@pytest.fixture
def slit(slit_space):
    return MeasureSpec.amplitude(slit_space, ["1", "-1", "1"])


@pytest.fixture
def slit_nulls(slit):
    return enumerate_precluded(slit)


@pytest.fixture
def ev(slit_space):
    """Shorthand: ev("AC") -> the event {A, C} of the three-slit space."""
    return lambda s: slit_space.event(list(s))


ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Collect one summary line per acceptance criterion; printed at the end of the run."""
    def _record(number, passed, detail):
        ACCEPTANCE_LINES.append((number, f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"))
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
