import pytest

from lambda_dicke.model import ModelParams

ACCEPTANCE_LINES = []


@pytest.fixture
def base():
    return ModelParams(delta=0.1, Delta=1.0, omega1=1.1, omega2=0.8, g1=0.0, g2=0.0)


@pytest.fixture
def degenerate():
    return ModelParams(delta=0.0, Delta=1.0, omega1=1.1, omega2=0.8, g1=0.0, g2=0.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
