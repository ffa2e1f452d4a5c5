"""Instantaneous one-body Hamiltonian: assembly, diagonalization, classification.

Eigenstates are indexed by energetic order only; no adiabatic tracking
through avoided crossings is attempted.  States are orthonormal with
respect to the grid quadrature (sum phi_i phi_j dx = delta_ij) and their
sign is fixed so that the component of largest magnitude is positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .grid import SpatialGrid, kinetic_matrix, second_derivative
from .potential import WellParameters, barrier_height, potential_at

RESIDUAL_TOLERANCE = 1e-9


class EigensolverError(RuntimeError):
    """Raised when the dense eigensolver fails or leaves large residuals."""


@dataclass(frozen=True)
class OneBodyOperator:
    """h = -(1/2) d^2/dx^2 + V(x, t) sampled on the grid at time t.

    barrier holds V(0, t), which need not coincide with any sampled value
    since x = 0 is not necessarily a grid point.
    """

    grid: SpatialGrid
    v: np.ndarray
    t: float
    barrier: float

    def apply(self, f: np.ndarray) -> np.ndarray:
        return -0.5 * second_derivative(self.grid, f) + self.v * f


@dataclass(frozen=True)
class EigenDecomposition:
    """Lowest eigenpairs of the one-body Hamiltonian at one instant.

    energies are ascending; states[:, i] is the i-th eigenfunction,
    quadrature-orthonormal and sign-fixed; barrier is V(0, t).
    """

    t: float
    energies: np.ndarray
    states: np.ndarray
    barrier: float

    @property
    def count(self) -> int:
        return self.energies.size


@dataclass(frozen=True)
class StateClassification:
    """Index partition into under-barrier, trapped over-barrier, untrapped.

    Boundary convention: eps == barrier counts as over-barrier trapped,
    eps == 0 counts as untrapped.
    """

    under_barrier: np.ndarray
    over_barrier_trapped: np.ndarray
    untrapped: np.ndarray


def assemble_h(grid: SpatialGrid, params: WellParameters, t: float) -> OneBodyOperator:
    v = potential_at(params, grid.points, t)
    return OneBodyOperator(grid=grid, v=v, t=t, barrier=barrier_height(params, t))


def dense_matrix(op: OneBodyOperator, kinetic: np.ndarray | None = None) -> np.ndarray:
    """Dense matrix of the operator; pass a cached kinetic matrix to reuse it."""
    if kinetic is None:
        kinetic = kinetic_matrix(op.grid)
    h = kinetic.copy()
    h[np.diag_indices_from(h)] += op.v
    return h


def eigendecompose(
    op: OneBodyOperator, k: int, kinetic: np.ndarray | None = None
) -> EigenDecomposition:
    """k lowest eigenpairs, ordered, quadrature-orthonormal, sign-fixed."""
    n = op.grid.n
    if not 1 <= k <= n:
        raise ValueError(f"eigenpair count must satisfy 1 <= k <= {n}, got {k}")
    h = dense_matrix(op, kinetic)
    try:
        energies, vectors = sla.eigh(h, subset_by_index=(0, k - 1))
    except sla.LinAlgError as exc:
        raise EigensolverError(f"dense diagonalization failed at t={op.t}: {exc}") from exc

    residuals = np.linalg.norm(h @ vectors - vectors * energies, axis=0)
    worst = float(np.max(residuals))
    if worst > RESIDUAL_TOLERANCE:
        raise EigensolverError(
            f"eigensolver residual {worst:.3e} exceeds {RESIDUAL_TOLERANCE:.0e} at t={op.t}"
        )

    # eigh returns l2-orthonormal columns; rescale to quadrature normalization
    vectors = vectors / np.sqrt(op.grid.dx)
    dominant = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[dominant, np.arange(k)])
    signs[signs == 0] = 1.0
    vectors = vectors * signs
    return EigenDecomposition(t=op.t, energies=energies, states=vectors, barrier=op.barrier)


def classify(eig: EigenDecomposition) -> StateClassification:
    """Partition the computed indices by energy relative to barrier and zero."""
    eps = eig.energies
    under = np.flatnonzero(eps < eig.barrier)
    over = np.flatnonzero((eps >= eig.barrier) & (eps < 0.0))
    untrapped = np.flatnonzero(eps >= 0.0)
    return StateClassification(
        under_barrier=under, over_barrier_trapped=over, untrapped=untrapped
    )


def trapped_states(eig: EigenDecomposition) -> np.ndarray:
    """Columns of all trapped (eps < 0) eigenfunctions."""
    return eig.states[:, eig.energies < 0.0]


def trapped_projector(eig: EigenDecomposition, dx: float) -> np.ndarray:
    """Rank-r projector onto the trapped subspace as a grid operator."""
    phi = trapped_states(eig)
    return (phi @ phi.T) * dx


class OneBodySolver:
    """Caches the dense kinetic matrix and diagonalizes at output times."""

    def __init__(self, grid: SpatialGrid, params: WellParameters, count: int):
        self.grid = grid
        self.params = params
        self.count = count
        self._kinetic = kinetic_matrix(grid)

    def decompose(self, t: float) -> EigenDecomposition:
        op = assemble_h(self.grid, self.params, t)
        return eigendecompose(op, self.count, kinetic=self._kinetic)
