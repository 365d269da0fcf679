import numpy as np
import pytest

from agler_hadamard import tuples as tp
from agler_hadamard.verify import crabb_davie_poly, holbrook_multiplier_poly, holbrook_poly

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one pass/fail line per acceptance criterion for the terminal summary."""

    def log(number: int, title: str, passed: bool, detail: str) -> None:
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} -- {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return log


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def P():
    return holbrook_poly()


@pytest.fixture(scope="session")
def p_cd():
    return crabb_davie_poly()


@pytest.fixture(scope="session")
def F_holbrook_poly():
    return holbrook_multiplier_poly()


@pytest.fixture(scope="session")
def H():
    return tp.holbrook()


@pytest.fixture(scope="session")
def CD():
    return tp.crabb_davie()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
