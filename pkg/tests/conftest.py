import pytest

from carnot_spectra.grid import Grid
from carnot_spectra.group import heisenberg


@pytest.fixture(scope="session")
def h1():
    return heisenberg(1)


@pytest.fixture(scope="session")
def small_grid():
    return Grid(8.0, 3.141592653589793, 16, 16)
