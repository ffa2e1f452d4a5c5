import numpy as np
import pytest

from wellcollider.config import GridSpec, RelaxSpec
from wellcollider.grid import build_grid
from wellcollider.potential import WellParameters


@pytest.fixture(scope="session")
def grid64():
    return build_grid(GridSpec(n=64, x_min=-8.0, x_max=8.0, boundary="periodic"))


@pytest.fixture(scope="session")
def paper_params():
    return WellParameters(
        V0=20.0, V0_prime=20.0, alpha=1.0, mu0=-3.5, mu0_prime=3.5, a=1.0 / 14.0, g=0.5
    )


@pytest.fixture(scope="session")
def small_params():
    """Shallow symmetric wells on a coarse grid, cheap to relax and evolve."""
    return WellParameters(
        V0=5.0, V0_prime=5.0, alpha=1.0, mu0=-1.75, mu0_prime=1.75, a=4.0, g=1.0
    )


def random_field(grid, rng, complex_valued=True):
    shape = grid.n
    field = rng.standard_normal(shape)
    if complex_valued:
        field = field + 1j * rng.standard_normal(shape)
    return field


def random_symmetric_state(grid, rng):
    """Normalized exchange-symmetric two-body state."""
    psi = rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n))
    psi = 0.5 * (psi + psi.T)
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx**2)
    return psi
