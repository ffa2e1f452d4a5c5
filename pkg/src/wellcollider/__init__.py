"""Two interacting bosons in colliding Gaussian wells, solved exactly on a grid.

The package propagates the full two-body wavefunction of two repulsive
bosons trapped in two uniformly accelerated Gaussian wells, and extracts
transport, emission and entanglement observables along the way.  Everything
is dimensionless: the length unit is sqrt(2) times the well standard
deviation, the energy unit hbar^2/(2 m sigma^2), the time unit
2 m sigma^2/hbar, and the speed unit their ratio.  In these units hbar = 1
and the one-body Hamiltonian reads -(1/2) d^2/dx^2 + V(x, t).
"""

__version__ = "0.1.0"

from .config import (
    ConfigError,
    ExperimentConfig,
    GridSpec,
    Kinematics,
    RelaxSpec,
    SweepSpec,
    config_hash,
    derive_kinematics,
    parse_config,
    sweep_points,
)
from .grid import SpatialGrid, apply_kinetic_factor, build_grid, second_derivative
from .potential import (
    TrajectorySample,
    WellParameters,
    barrier_height,
    fwhm_bounds,
    potential_at,
    well_centers,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "GridSpec",
    "Kinematics",
    "RelaxSpec",
    "SpatialGrid",
    "SweepSpec",
    "TrajectorySample",
    "WellParameters",
    "apply_kinetic_factor",
    "barrier_height",
    "build_grid",
    "config_hash",
    "derive_kinematics",
    "fwhm_bounds",
    "parse_config",
    "potential_at",
    "second_derivative",
    "sweep_points",
    "well_centers",
    "__version__",
]
