from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from prime_ifs.primes import primes_from_count  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def primes_78498():
    """78,498 consecutive primes from 7: the pair-count convention used throughout."""
    return primes_from_count(7, 78_498)


@pytest.fixture(scope="session")
def primes_2e5():
    return primes_from_count(7, 200_000)
