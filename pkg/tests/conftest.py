import math
import sys
from functools import lru_cache
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conestokes import CircularCone, stokes_spectrum  # noqa: E402

HALF = math.pi / 2
WIDE = 2 * math.pi / 3


@lru_cache(maxsize=None)
def cached_stokes(theta0: float, window=(-2.0, 1.6), m_max: int = 6, validate: bool = True):
    return stokes_spectrum(CircularCone(theta0), m_max=m_max, window=window, validate=validate, workers=4)


@pytest.fixture(scope="session")
def stokes_half():
    return cached_stokes(HALF)


@pytest.fixture(scope="session")
def stokes_wide():
    return cached_stokes(WIDE)


def pytest_terminal_summary(terminalreporter):
    from acceptance_registry import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
