import math

import numpy as np
import pytest

from symorbit import BetaSpec, SftSpec, build_beta_shift, build_full_shift, build_sft

GOLDEN_RATIO = (1 + math.sqrt(5)) / 2


@pytest.fixture(scope="session")
def full2():
    return build_full_shift(2)


@pytest.fixture(scope="session")
def golden_sft():
    return build_sft(SftSpec(2, forbidden=((1, 1),)))


@pytest.fixture(scope="session")
def golden_beta():
    return build_beta_shift(BetaSpec.golden())


def random_admissible(shift, n, rng):
    """Random admissible word grown symbol by symbol (the shifts used here have no dead ends)."""
    w = ()
    while len(w) < n:
        options = [a for a in range(shift.m) if shift.admissible(w + (a,))]
        w = w + (int(rng.choice(options)),)
    return w


def brute_language(shift, n):
    """Every admissible word of length n, by filtering the full product."""
    from itertools import product

    return [w for w in product(range(shift.m), repeat=n) if shift.admissible(w)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: list = []


def record_criterion(number: int, title: str, ok: bool, detail: str) -> str:
    line = f"criterion {number:>2} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
