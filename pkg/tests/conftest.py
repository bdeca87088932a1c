import numpy as np
import pytest

from varbesov.dyadic import build_partition
from varbesov.spectral import Grid

# criterion number -> (description, passed) filled in by test_acceptance.py
ACCEPTANCE: dict = {}


def record(number: int, text: str, passed: bool) -> None:
    # parametrized criteria pass only if every case passes
    prev = ACCEPTANCE.get(number)
    ACCEPTANCE[number] = (text, bool(passed) and (prev is None or prev[1]))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        text, ok = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {text}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def grid2():
    return Grid(2, 32, 1.0)


@pytest.fixture(scope="session")
def part2(grid2):
    return build_partition(grid2)
