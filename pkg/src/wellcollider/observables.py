"""Per-time physical quantities extracted from the two-boson wavefunction.

Conventions: the one-body density integrates to the particle number N = 2;
the one-body density matrix kernel carries unit trace per particle, so its
quadrature eigenvalues are the natural populations with sum 1.  The
untrapped fraction uses the tensor-projector identity
<Psi|(P_T x P_T)|Psi> = sum over symmetrized trapped pair states of
|<pair|Psi>|^2, which holds exactly for exchange-symmetric states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .grid import SpatialGrid, forward_2d, inverse_2d
from .onebody import EigenDecomposition, StateClassification, trapped_states
from .potential import WellParameters, potential_at

N_PARTICLES = 2
POPULATION_CUTOFF = 1e-14
DEFAULT_ENTROPY_NORMALIZATION = 6


def one_body_density(psi: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    """Probability density of finding a particle at x; integrates to N."""
    return N_PARTICLES * np.sum(np.abs(psi) ** 2, axis=1) * grid.dx


def obdm(psi: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    """One-body density matrix kernel rho(x, x'), trace 1 per particle.

    The kernel satisfies sum_x rho(x, x) dx = 1 and
    one_body_density = N * diag(kernel).
    """
    return (psi @ psi.conj().T) * grid.dx


def natural_populations(dm: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    """Eigenvalues of the one-body density operator, descending, sum 1."""
    lam = sla.eigh(dm * grid.dx, eigvals_only=True, driver="evd")
    lam = np.sort(lam)[::-1]
    return np.clip(lam, 0.0, None)


def entropy_from_populations(populations: np.ndarray, normalization_m: int = DEFAULT_ENTROPY_NORMALIZATION):
    """Von Neumann entropy -sum lam ln lam and its ratio to ln(M)."""
    lam = populations[populations > POPULATION_CUTOFF]
    s1 = float(-np.sum(lam * np.log(lam)))
    return s1, s1 / np.log(normalization_m)


def von_neumann_entropy(dm: np.ndarray, grid: SpatialGrid, normalization_m: int = DEFAULT_ENTROPY_NORMALIZATION):
    """Entropy of a one-body density matrix kernel plus its ratio to ln(M)."""
    return entropy_from_populations(natural_populations(dm, grid), normalization_m)


def center_of_mass(rho: np.ndarray, grid: SpatialGrid) -> float:
    """Mean particle position (1/N) sum x rho dx."""
    return float(np.sum(grid.points * rho) * grid.dx / N_PARTICLES)


def truncated_com(rho: np.ndarray, grid: SpatialGrid, sign: int) -> float:
    """Mean position restricted to one side of x = 0.

    A grid point at exactly x = 0 contributes half to each side, which
    keeps X+ + X- equal to the full center of mass.
    """
    if sign not in (+1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    x = grid.points
    theta = np.where(sign * x > 0.0, 1.0, 0.0)
    theta[x == 0.0] = 0.5
    return float(np.sum(x * theta * rho) * grid.dx / N_PARTICLES)


@dataclass(frozen=True)
class EnergyDecomposition:
    total: float
    kinetic: float
    potential: float
    interaction: float


def energy_decomposition(
    psi: np.ndarray, grid: SpatialGrid, params: WellParameters, t: float
) -> EnergyDecomposition:
    """Kinetic, potential and interaction energies of the state at time t."""
    dx2 = grid.dx**2
    k2 = grid.wavenumbers**2
    psik = forward_2d(grid, psi)
    psik *= 0.5 * (k2[:, None] + k2[None, :])
    kin_psi = inverse_2d(grid, psik, overwrite=True)
    e_kin = float(np.real(np.vdot(psi, kin_psi)) * dx2)

    v = potential_at(params, grid.points, t)
    prob = np.abs(psi) ** 2
    e_pot = float(np.sum((v[:, None] + v[None, :]) * prob) * dx2)

    n = grid.n
    e_int = float(params.g * np.sum(prob.flat[:: n + 1]) * grid.dx)
    return EnergyDecomposition(
        total=e_kin + e_pot + e_int, kinetic=e_kin, potential=e_pot, interaction=e_int
    )


def eigen_occupations(psi: np.ndarray, grid: SpatialGrid, eig: EigenDecomposition) -> np.ndarray:
    """Probability of finding a particle in each computed eigenstate."""
    overlaps = (eig.states.T @ psi) * grid.dx
    return np.sum(np.abs(overlaps) ** 2, axis=1) * grid.dx


def projector_occupations(p: np.ndarray, classification: StateClassification):
    """(under-barrier, trapped over-barrier, untrapped) occupation triple.

    The untrapped share is defined as the complement, which folds any
    weight beyond the computed eigenstates into the third component.
    """
    o_a = float(np.sum(p[classification.under_barrier]))
    o_b = float(np.sum(p[classification.over_barrier_trapped]))
    return o_a, o_b, 1.0 - o_a - o_b


def untrapped_fraction(psi: np.ndarray, grid: SpatialGrid, eig: EigenDecomposition) -> float:
    """Weight of the state outside the symmetrized trapped-pair subspace."""
    phi = trapped_states(eig)
    if phi.shape[1] == 0:
        return 1.0
    coeff = (phi.T @ psi @ phi) * grid.dx**2
    m_b = float(np.sum(np.abs(coeff) ** 2))
    return float(min(1.0, max(0.0, 1.0 - m_b)))


@dataclass(frozen=True)
class TimeSeriesRecord:
    """All observables evaluated at one output time."""

    t: float
    com: float
    com_pos: float
    com_neg: float
    energy: EnergyDecomposition
    occupations: np.ndarray
    occ_under_barrier: float
    occ_over_barrier: float
    occ_untrapped: float
    untrapped: float
    entropy: float
    entropy_ratio: float
    populations: np.ndarray


def evaluate_record(
    psi: np.ndarray,
    grid: SpatialGrid,
    params: WellParameters,
    t: float,
    eig: EigenDecomposition,
    classification: StateClassification,
    *,
    n_populations: int = 8,
    entropy_normalization: int = DEFAULT_ENTROPY_NORMALIZATION,
) -> TimeSeriesRecord:
    """Evaluate the full observable bundle for one snapshot."""
    if eig.t != t:
        raise ValueError(f"eigendecomposition at t={eig.t} does not match snapshot t={t}")
    rho = one_body_density(psi, grid)
    energy = energy_decomposition(psi, grid, params, t)
    p = eigen_occupations(psi, grid, eig)
    o_a, o_b, o_c = projector_occupations(p, classification)
    populations = natural_populations(obdm(psi, grid), grid)
    s1, ratio = entropy_from_populations(populations, entropy_normalization)
    top = np.zeros(n_populations)
    m = min(n_populations, populations.size)
    top[:m] = populations[:m]
    return TimeSeriesRecord(
        t=t,
        com=center_of_mass(rho, grid),
        com_pos=truncated_com(rho, grid, +1),
        com_neg=truncated_com(rho, grid, -1),
        energy=energy,
        occupations=p,
        occ_under_barrier=o_a,
        occ_over_barrier=o_b,
        occ_untrapped=o_c,
        untrapped=untrapped_fraction(psi, grid, eig),
        entropy=s1,
        entropy_ratio=ratio,
        populations=top,
    )
