import numpy as np
import pytest

from bosonclt.grid import Grid, make_potential


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid16():
    return Grid(16, 8.0)


def random_complex(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


@pytest.fixture
def bog_setup():
    """Standard Bogoliubov setting: M = 32, Gaussian V, moving Gaussian packet."""
    grid = Grid(32, 16.0)
    V = make_potential(grid, "gaussian", strength=2.0, width=1.0)
    phi = grid.gaussian(1.5, 0.0, 0.7)
    return grid, V, phi


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
