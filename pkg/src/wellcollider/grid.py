"""Spatial discretization and spectral derivative kernels.

Periodic boundaries use the FFT with wavenumbers 2*pi*fftfreq(n, dx);
hard walls use the type-I discrete sine transform on interior nodes with
mode wavenumbers m*pi/L.  Transform sizes are unrestricted (mixed radix);
the grids used in production are not powers of two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .config import BOUNDARY_HARDWALL, BOUNDARY_PERIODIC, ConfigError, GridSpec


@dataclass(frozen=True)
class SpatialGrid:
    """Immutable discrete 1D domain with its transform wavenumbers."""

    spec: GridSpec
    points: np.ndarray
    dx: float
    wavenumbers: np.ndarray

    @property
    def n(self) -> int:
        return self.spec.n


def build_grid(spec: GridSpec) -> SpatialGrid:
    """Build the grid points and wavenumbers for the requested boundary."""
    if spec.n < 8:
        raise ConfigError(f"grid n >= 8 required, got {spec.n}")
    if not spec.x_max > spec.x_min:
        raise ConfigError(f"x_max > x_min required, got [{spec.x_min}, {spec.x_max}]")
    length = spec.x_max - spec.x_min
    if spec.boundary == BOUNDARY_PERIODIC:
        dx = length / spec.n
        points = spec.x_min + dx * np.arange(1, spec.n + 1)
        k = 2.0 * np.pi * np.fft.fftfreq(spec.n, d=dx)
    elif spec.boundary == BOUNDARY_HARDWALL:
        dx = length / (spec.n + 1)
        points = spec.x_min + dx * np.arange(1, spec.n + 1)
        k = np.pi * np.arange(1, spec.n + 1) / length
    else:
        raise ConfigError(f"unknown boundary {spec.boundary!r}")
    points.setflags(write=False)
    k.setflags(write=False)
    return SpatialGrid(spec=spec, points=points, dx=dx, wavenumbers=k)


def forward_1d(grid: SpatialGrid, f: np.ndarray, axis: int = -1) -> np.ndarray:
    if grid.spec.boundary == BOUNDARY_PERIODIC:
        return sfft.fft(f, axis=axis)
    return sfft.dst(f, type=1, axis=axis)


def inverse_1d(grid: SpatialGrid, f: np.ndarray, axis: int = -1) -> np.ndarray:
    if grid.spec.boundary == BOUNDARY_PERIODIC:
        return sfft.ifft(f, axis=axis)
    return sfft.idst(f, type=1, axis=axis)


def forward_2d(grid: SpatialGrid, f: np.ndarray, workers: int = 1, overwrite: bool = False) -> np.ndarray:
    if grid.spec.boundary == BOUNDARY_PERIODIC:
        return sfft.fft2(f, workers=workers, overwrite_x=overwrite)
    return sfft.dstn(f, type=1, workers=workers, overwrite_x=overwrite)


def inverse_2d(grid: SpatialGrid, f: np.ndarray, workers: int = 1, overwrite: bool = False) -> np.ndarray:
    if grid.spec.boundary == BOUNDARY_PERIODIC:
        return sfft.ifft2(f, workers=workers, overwrite_x=overwrite)
    return sfft.idstn(f, type=1, workers=workers, overwrite_x=overwrite)


def _check_length(grid: SpatialGrid, f: np.ndarray) -> None:
    if f.shape[-1] != grid.n:
        raise ValueError(f"field length {f.shape[-1]} does not match grid n={grid.n}")


def second_derivative(grid: SpatialGrid, f: np.ndarray) -> np.ndarray:
    """Spectral d^2 f/dx^2 on the grid."""
    _check_length(grid, f)
    return inverse_1d(grid, -grid.wavenumbers**2 * forward_1d(grid, f))


def apply_kinetic_factor(grid: SpatialGrid, f: np.ndarray, dt_eff: complex) -> np.ndarray:
    """Exact free evolution exp(-i (k^2/2) dt_eff) applied in transform space.

    A purely imaginary dt_eff = -i*tau yields the diffusive factor
    exp(-(k^2/2) tau) used by imaginary-time relaxation.
    """
    _check_length(grid, f)
    if not np.isfinite(complex(dt_eff)):
        raise ValueError(f"dt_eff must be finite, got {dt_eff}")
    phase = np.exp(-0.5j * grid.wavenumbers**2 * complex(dt_eff))
    return inverse_1d(grid, phase * forward_1d(grid, f))


def kinetic_matrix(grid: SpatialGrid) -> np.ndarray:
    """Dense real symmetric matrix of the kinetic operator -(1/2) d^2/dx^2."""
    eye = np.eye(grid.n)
    columns = inverse_1d(grid, 0.5 * grid.wavenumbers[:, None] ** 2 * forward_1d(grid, eye, axis=0), axis=0)
    mat = np.real(columns)
    return 0.5 * (mat + mat.T)
