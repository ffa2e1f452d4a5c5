import numpy as np
import pytest

from wellcollider.config import GridSpec, RelaxSpec
from wellcollider.grid import build_grid
from wellcollider.observables import (
    center_of_mass,
    eigen_occupations,
    energy_decomposition,
    entropy_from_populations,
    evaluate_record,
    natural_populations,
    obdm,
    one_body_density,
    projector_occupations,
    truncated_com,
    untrapped_fraction,
    von_neumann_entropy,
)
from wellcollider.onebody import assemble_h, classify, eigendecompose
from wellcollider.potential import WellParameters
from wellcollider.twobody import apply_hamiltonian, relax_ground_state

from .conftest import random_symmetric_state
from .oracles import enumerated_trapped_overlap

RNG = np.random.default_rng(31)

WELLS = WellParameters(V0=5.0, V0_prime=5.0, alpha=1.0, mu0=-1.75, mu0_prime=1.75, a=0.0, g=1.0)


def normalized_orbital(grid, center, width=0.6):
    phi = np.exp(-((grid.points - center) ** 2) / (2.0 * width**2))
    return phi / np.sqrt(np.sum(phi**2) * grid.dx)


def product_state(grid, phi):
    psi = np.outer(phi, phi).astype(complex)
    return psi / np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx**2)


def symmetrized_two_mode(grid, phi_a, phi_b):
    psi = (np.outer(phi_a, phi_b) + np.outer(phi_b, phi_a)) / np.sqrt(2.0)
    return (psi / np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx**2)).astype(complex)


def test_density_of_product_state(grid64):
    phi = normalized_orbital(grid64, -2.0)
    rho = one_body_density(product_state(grid64, phi), grid64)
    assert np.max(np.abs(rho - 2.0 * phi**2)) < 1e-10
    assert np.sum(rho) * grid64.dx == pytest.approx(2.0, abs=1e-10)
    assert np.min(rho) >= -1e-12


def test_density_mirror_symmetry(grid64):
    phi_l = normalized_orbital(grid64, -2.0)
    phi_r = normalized_orbital(grid64, 2.0)
    psi = symmetrized_two_mode(grid64, phi_l, phi_r)
    rho = one_body_density(psi, grid64)
    mirrored = np.roll(rho[::-1], -1)
    assert np.max(np.abs(rho - mirrored)) < 1e-8


def test_relaxed_density_localized_in_left_well():
    grid = build_grid(GridSpec(n=96, x_min=-8.0, x_max=8.0))
    params = WellParameters(V0=5.0, V0_prime=0.0, alpha=1.0, mu0=-2.0, mu0_prime=2.0, a=0.0, g=1.0)
    state, _, _ = relax_ground_state(params, grid, RelaxSpec(tolerance=1e-11, max_steps=60000, dt_imag=1e-3))
    rho = one_body_density(state.psi, grid)
    window = (grid.points >= params.mu0 - 2.0) & (grid.points <= params.mu0 + 2.0)
    assert np.sum(rho[window]) / np.sum(rho) >= 0.99
    assert abs(center_of_mass(rho, grid) - params.mu0) < 0.02


def test_obdm_product_state_is_rank_one(grid64):
    phi = normalized_orbital(grid64, 0.5)
    dm = obdm(product_state(grid64, phi), grid64)
    assert np.max(np.abs(dm - dm.conj().T)) < 1e-12
    lam = natural_populations(dm, grid64)
    assert lam[0] == pytest.approx(1.0, abs=1e-10)
    assert np.max(lam[1:]) < 1e-10
    assert np.sum(lam) == pytest.approx(1.0, abs=1e-8)


def test_obdm_two_mode_state_half_half(grid64):
    phi_a = normalized_orbital(grid64, -3.0, width=0.5)
    phi_b = normalized_orbital(grid64, 3.0, width=0.5)
    # centers 6 sigma apart: overlap is numerically zero
    psi = symmetrized_two_mode(grid64, phi_a, phi_b)
    lam = natural_populations(obdm(psi, grid64), grid64)
    assert lam[0] == pytest.approx(0.5, abs=1e-8)
    assert lam[1] == pytest.approx(0.5, abs=1e-8)


def test_density_equals_n_times_obdm_diagonal(grid64):
    psi = random_symmetric_state(grid64, RNG)
    rho = one_body_density(psi, grid64)
    dm = obdm(psi, grid64)
    assert np.max(np.abs(rho - 2.0 * np.real(np.diag(dm)))) < 1e-10


def test_entropy_limits():
    s_pure, ratio_pure = entropy_from_populations(np.array([1.0]))
    assert s_pure == 0.0 and ratio_pure == 0.0
    s_uniform, ratio_uniform = entropy_from_populations(np.full(6, 1.0 / 6.0))
    assert s_uniform == pytest.approx(np.log(6.0), abs=1e-12)
    assert s_uniform == pytest.approx(1.79, abs=0.01)
    assert ratio_uniform == pytest.approx(1.0, abs=1e-12)
    s_half, _ = entropy_from_populations(np.array([0.5, 0.5]))
    assert s_half == pytest.approx(np.log(2.0), abs=1e-12)


def test_entropy_is_basis_independent(grid64):
    psi = random_symmetric_state(grid64, RNG)
    dm = obdm(psi, grid64)
    s_direct, _ = von_neumann_entropy(dm, grid64)
    q, _ = np.linalg.qr(RNG.standard_normal((64, 64)) + 1j * RNG.standard_normal((64, 64)))
    rotated = q @ dm @ q.conj().T
    s_rotated, _ = von_neumann_entropy(rotated, grid64)
    assert abs(s_direct - s_rotated) < 1e-10


def test_center_of_mass_cases(grid64):
    phi = normalized_orbital(grid64, 0.0)
    rho = one_body_density(product_state(grid64, phi), grid64)
    assert abs(center_of_mass(rho, grid64)) < 1e-10

    peak = np.zeros(grid64.n)
    idx = int(np.argmin(np.abs(grid64.points + 3.5)))
    peak[idx] = 2.0 / grid64.dx
    assert center_of_mass(peak, grid64) == pytest.approx(grid64.points[idx], abs=1e-12)


def test_truncated_com_one_sided(grid64):
    phi = normalized_orbital(grid64, -3.0, width=0.5)
    rho = one_body_density(product_state(grid64, phi), grid64)
    assert truncated_com(rho, grid64, +1) == pytest.approx(0.0, abs=1e-12)
    assert truncated_com(rho, grid64, -1) == pytest.approx(center_of_mass(rho, grid64), abs=1e-9)


def test_truncated_com_mirror_antisymmetry(grid64):
    phi_l = normalized_orbital(grid64, -2.0)
    phi_r = normalized_orbital(grid64, 2.0)
    rho = one_body_density(symmetrized_two_mode(grid64, phi_l, phi_r), grid64)
    assert truncated_com(rho, grid64, +1) == pytest.approx(-truncated_com(rho, grid64, -1), abs=1e-9)


def test_truncated_com_peak_at_positive_center(grid64):
    peak = np.zeros(grid64.n)
    idx = int(np.argmin(np.abs(grid64.points - 3.5)))
    peak[idx] = 2.0 / grid64.dx
    assert truncated_com(peak, grid64, +1) == pytest.approx(grid64.points[idx], abs=1e-12)
    assert truncated_com(peak, grid64, -1) == 0.0


def test_truncated_com_halves_grid_zero(grid64):
    # x = 0 is a grid point of this even symmetric grid
    idx = int(np.argmin(np.abs(grid64.points)))
    assert grid64.points[idx] == 0.0
    rho = np.zeros(grid64.n)
    rho[idx] = 2.0 / grid64.dx
    plus = truncated_com(rho, grid64, +1)
    minus = truncated_com(rho, grid64, -1)
    assert plus == 0.0 and minus == 0.0
    # and the split preserves the full moment for generic densities
    psi = random_symmetric_state(grid64, RNG)
    rho = one_body_density(psi, grid64)
    total = truncated_com(rho, grid64, +1) + truncated_com(rho, grid64, -1)
    assert total == pytest.approx(center_of_mass(rho, grid64), abs=1e-12)


def test_energy_decomposition_consistency(grid64):
    psi = random_symmetric_state(grid64, RNG)
    parts = energy_decomposition(psi, grid64, WELLS, 0.0)
    reference = np.real(np.vdot(psi, apply_hamiltonian(psi, grid64, WELLS, 0.0))) * grid64.dx**2
    assert parts.total == pytest.approx(reference, abs=1e-10)
    assert parts.total == pytest.approx(
        parts.kinetic + parts.potential + parts.interaction, abs=1e-12
    )


def test_energy_decomposition_no_interaction_when_g_zero(grid64):
    psi = random_symmetric_state(grid64, RNG)
    free_wells = WellParameters(V0=5.0, V0_prime=5.0, alpha=1.0, mu0=-1.75, mu0_prime=1.75, a=0.0, g=0.0)
    parts = energy_decomposition(psi, grid64, free_wells, 0.0)
    assert parts.interaction == 0.0


def test_energy_decomposition_free_gaussian_is_kinetic(grid64):
    phi = normalized_orbital(grid64, 0.0)
    psi = product_state(grid64, phi)
    free = WellParameters(V0=0.0, V0_prime=0.0, alpha=1.0, mu0=-1.0, mu0_prime=1.0, a=0.0, g=0.0)
    parts = energy_decomposition(psi, grid64, free, 0.0)
    assert parts.total == pytest.approx(parts.kinetic, abs=1e-12)
    assert parts.potential == 0.0


@pytest.fixture(scope="module")
def eig64(grid64):
    return eigendecompose(assemble_h(grid64, WELLS, 0.0), 12)


def test_occupations_of_eigenstate_products(grid64, eig64):
    phi0 = eig64.states[:, 0]
    phi1 = eig64.states[:, 1]
    p = eigen_occupations(product_state(grid64, phi0), grid64, eig64)
    assert p[0] == pytest.approx(1.0, abs=1e-9)
    assert np.max(p[1:]) < 1e-9

    p2 = eigen_occupations(symmetrized_two_mode(grid64, phi0, phi1), grid64, eig64)
    assert p2[0] == pytest.approx(0.5, abs=1e-9)
    assert p2[1] == pytest.approx(0.5, abs=1e-9)


def test_occupations_sum_to_one_over_complete_basis(grid64):
    eig_full = eigendecompose(assemble_h(grid64, WELLS, 0.0), grid64.n)
    psi = random_symmetric_state(grid64, RNG)
    p = eigen_occupations(psi, grid64, eig_full)
    assert np.sum(p) == pytest.approx(1.0, abs=1e-8)
    assert np.all(p >= -1e-12) and np.all(p <= 1.0 + 1e-12)


def test_projector_occupations_sum(eig64):
    p = RNG.random(12)
    cls = classify(eig64)
    o_a, o_b, o_c = projector_occupations(p, cls)
    assert o_a + o_b + o_c == pytest.approx(1.0, abs=1e-12)
    assert o_a == pytest.approx(np.sum(p[cls.under_barrier]), abs=1e-12)


def test_untrapped_fraction_trapped_state(grid64, eig64):
    phi0 = eig64.states[:, 0]
    assert untrapped_fraction(product_state(grid64, phi0), grid64, eig64) < 1e-10


def test_untrapped_fraction_mixed_pair(grid64, eig64):
    trapped = eig64.states[:, 0]
    untrapped = eig64.states[:, -1]
    assert eig64.energies[-1] > 0.0
    psi = symmetrized_two_mode(grid64, trapped, untrapped)
    assert untrapped_fraction(psi, grid64, eig64) == pytest.approx(1.0, abs=1e-9)


def test_untrapped_fraction_matches_enumeration():
    """Tensor-projector shortcut against explicit pair-state enumeration."""
    grid = build_grid(GridSpec(n=32, x_min=-7.0, x_max=7.0))
    wells = WellParameters(V0=5.0, V0_prime=5.0, alpha=1.0, mu0=-1.75, mu0_prime=1.75, a=0.0, g=1.0)
    eig = eigendecompose(assemble_h(grid, wells, 0.0), 12)
    psi = random_symmetric_state(grid, RNG)
    fast = untrapped_fraction(psi, grid, eig)
    slow = 1.0 - enumerated_trapped_overlap(psi, grid, eig)
    assert abs(fast - slow) < 1e-10


def test_record_time_mismatch_rejected(grid64, eig64):
    psi = random_symmetric_state(grid64, RNG)
    with pytest.raises(ValueError, match="does not match"):
        evaluate_record(psi, grid64, WELLS, 1.0, eig64, classify(eig64))


def test_record_bundles_consistent_values(grid64, eig64):
    psi = random_symmetric_state(grid64, RNG)
    record = evaluate_record(psi, grid64, WELLS, 0.0, eig64, classify(eig64))
    assert record.occ_under_barrier + record.occ_over_barrier + record.occ_untrapped == pytest.approx(1.0, abs=1e-12)
    assert 0.0 <= record.untrapped <= 1.0
    assert record.entropy >= 0.0
    assert record.populations.shape == (8,)
    rho = one_body_density(psi, grid64)
    assert record.com == pytest.approx(center_of_mass(rho, grid64), abs=1e-12)
    assert record.com_pos + record.com_neg == pytest.approx(record.com, abs=1e-10)
