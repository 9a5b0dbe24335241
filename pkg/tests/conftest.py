from pathlib import Path

import numpy as np
import pytest

from gameform import Bilinear, BlockDims, QuadraticSaddle, RpsSoftmax, random_polynomial

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def configs():
    return CONFIGS


@pytest.fixture
def unit_bilinear():
    return Bilinear([[1.0]])


@pytest.fixture
def unit_quadratic():
    return QuadraticSaddle([[1.0]], [[1.0]], [[1.0]])


@pytest.fixture
def rps():
    return RpsSoftmax(1.0, 1.0, 0.0)


def random_dims(rng, top=3):
    return BlockDims(int(rng.integers(1, top + 1)), int(rng.integers(1, top + 1)))


def sample_games(seed, n, degree=3, top=3):
    """``n`` random polynomial games with random dims up to ``(top, top)``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        dims = random_dims(rng, top)
        out.append((random_polynomial(dims, int(rng.integers(1, degree + 1)), rng), rng))
    return out


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
