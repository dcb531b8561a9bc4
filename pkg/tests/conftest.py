import numpy as np
import pytest

from kappa_flow.grid import Grid

TWO_PI = 2.0 * np.pi

# criterion name -> passed, filled by the acceptance suite and echoed at the end
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def smooth_scalar(grid: Grid, rng, modes: int = 3, amp: float = 1.0):
    """Random trigonometric polynomial with low wavenumbers."""
    X = grid.coords()
    out = np.zeros(grid.shape)
    for _ in range(modes):
        k = rng.integers(-2, 3, size=grid.dim)
        phase = rng.uniform(0, TWO_PI)
        arg = sum(TWO_PI * kk * x / L for kk, x, L in zip(k, X, grid.length))
        out += amp * rng.uniform(-1, 1) * np.sin(arg + phase)
    return out


def smooth_vector(grid: Grid, rng, amp: float = 1.0):
    return np.stack([smooth_scalar(grid, rng, amp=amp) for _ in range(grid.dim)])
