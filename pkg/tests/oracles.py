"""Independent brute-force references used only by the test suite.

Everything here goes through dense matrices and explicit enumeration,
deliberately avoiding the split-step/tensor shortcuts used in production.
"""

import numpy as np
import scipy.linalg as sla

from wellcollider.grid import kinetic_matrix
from wellcollider.potential import potential_at


def dense_two_body_hamiltonian(grid, params, t):
    """Full n^2 x n^2 matrix of the two-body Hamiltonian at time t."""
    n = grid.n
    h1 = kinetic_matrix(grid) + np.diag(potential_at(params, grid.points, t))
    h2 = np.kron(h1, np.eye(n)) + np.kron(np.eye(n), h1)
    diag = np.arange(n) * n + np.arange(n)
    h2[diag, diag] += params.g / grid.dx
    return h2


def symmetric_subspace_ground_energy(grid, params):
    """Lowest eigenvalue of the two-body Hamiltonian in the bosonic sector."""
    n = grid.n
    h2 = dense_two_body_hamiltonian(grid, params, 0.0)
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    basis = np.zeros((n * n, len(pairs)))
    for col, (i, j) in enumerate(pairs):
        if i == j:
            basis[i * n + j, col] = 1.0
        else:
            basis[i * n + j, col] = basis[j * n + i, col] = 1.0 / np.sqrt(2.0)
    h_sym = basis.T @ h2 @ basis
    return float(sla.eigh(h_sym, eigvals_only=True, subset_by_index=(0, 0))[0])


def expm_apply_taylor(matrix, vector, scale):
    """exp(scale * matrix) @ vector via a plain Taylor sum.

    Safe for ||scale * matrix|| well below one; terms are added until they
    fall under machine precision relative to the accumulated result.
    """
    result = vector.astype(complex).copy()
    term = vector.astype(complex).copy()
    for order in range(1, 60):
        term = (scale / order) * (matrix @ term)
        result += term
        if np.linalg.norm(term) < 1e-17 * np.linalg.norm(result):
            return result
    raise RuntimeError("Taylor expansion did not converge; reduce the substep")


def time_ordered_reference(grid, params, psi0, t_final, substep):
    """Propagate with piecewise-constant midpoint Hamiltonians, dense algebra."""
    n = grid.n
    k1 = kinetic_matrix(grid)
    k2 = np.kron(k1, np.eye(n)) + np.kron(np.eye(n), k1)
    diag = np.arange(n) * n + np.arange(n)
    m = int(round(t_final / substep))
    dt = t_final / m
    vec = psi0.ravel().astype(complex).copy()
    h = np.zeros_like(k2)
    for j in range(m):
        tm = (j + 0.5) * dt
        v = potential_at(params, grid.points, tm)
        h[:] = k2
        h[np.diag_indices_from(h)] += (v[:, None] + v[None, :]).ravel()
        h[diag, diag] += params.g / grid.dx
        vec = expm_apply_taylor(h, vec, -1j * dt)
    return vec.reshape(n, n)


def enumerated_trapped_overlap(psi, grid, eig):
    """Sum of |<pair state|Psi>|^2 over symmetrized trapped pair states."""
    phi = eig.states[:, eig.energies < 0.0]
    r = phi.shape[1]
    total = 0.0
    for i in range(r):
        for j in range(i, r):
            if i == j:
                pair = np.outer(phi[:, i], phi[:, i])
            else:
                pair = (np.outer(phi[:, i], phi[:, j]) + np.outer(phi[:, j], phi[:, i])) / np.sqrt(2.0)
            amp = np.sum(pair * psi) * grid.dx**2
            total += abs(amp) ** 2
    return total
