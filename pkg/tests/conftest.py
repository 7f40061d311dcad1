import pytest

from hives.core import WeightTriple

# criterion lines appended by test_acceptance, echoed after the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def t506():
    return WeightTriple((40, 30, 20, 10), (40, 30, 20, 10), (65, 55, 45, 35))


@pytest.fixture
def t3():
    return WeightTriple((2, 1, 0), (2, 1, 0), (3, 2, 1))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
