import numpy as np
import pytest

import autopump as ap
from autopump.topology import GapClosureError, band_energy, band_state, bloch_h, zak_phase


SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def test_bloch_matrix_at_phi_half_pi():
    eta = 0.95
    for k in (-2.1, 0.0, 0.7, np.pi):
        h = bloch_h(k, np.pi / 2, eta).matrix
        want = eta * SZ + 0.5 * np.sin(k) * SY - 0.5 * (1 + np.cos(k)) * SX
        assert np.abs(h - want).max() <= 1e-14


def test_bloch_matrix_hermitian_and_closed_form_energies():
    eta = 0.95
    ks = -np.pi + 2 * np.pi * np.arange(32) / 32
    phis = 2 * np.pi * np.arange(32) / 32
    for k in ks:
        for phi in phis:
            h = bloch_h(k, phi, eta).matrix
            assert np.abs(h - h.conj().T).max() <= 1e-14
            evals = np.linalg.eigvalsh(h)
            e = band_energy(k, phi, eta)
            assert abs(evals[0] + e) <= 1e-12
            assert abs(evals[1] - e) <= 1e-12


def test_zero_coupling_band_is_gapless_cosine():
    ks = np.linspace(-np.pi, np.pi, 41)
    assert np.abs(band_energy(ks, 0.3, 0.0) - np.abs(np.cos(ks / 2))).max() <= 1e-12
    assert band_energy(np.pi, 0.1, 0.0) <= 1e-12
    with pytest.raises(GapClosureError):
        band_state(np.pi, 0.1, 0.0)


def test_band_state_closed_form_at_k0_phi_half_pi():
    # h(0, pi/2) = J eta sigma_z - J sigma_x; lower eigenvector from the 2x2 formula
    eta = 0.95
    a, c = eta, -1.0
    e = np.hypot(a, c)
    oracle = np.array([c, -(a + e)])
    oracle = oracle / np.linalg.norm(oracle)
    got = band_state(0.0, np.pi / 2, eta, band="-")
    h = eta * SZ - SX
    assert np.abs(h @ got + e * got).max() <= 1e-12
    overlap = abs(np.vdot(oracle, got))
    assert overlap == pytest.approx(1.0, abs=1e-12)
    assert got[0].imag == 0.0 and got[0].real > 0


def test_band_states_orthogonal_and_deterministic():
    rng = np.random.default_rng(2)
    for _ in range(20):
        k = rng.uniform(-np.pi, np.pi)
        phi = rng.uniform(0, 2 * np.pi)
        lower = band_state(k, phi, 0.8)
        upper = band_state(k, phi, 0.8, band="+")
        assert abs(np.vdot(lower, upper)) <= 1e-12
        again = band_state(k, phi, 0.8)
        assert np.array_equal(lower, again)


def test_zak_phase_equals_manual_wilson_loop_with_random_gauge():
    eta, phi, n_k = 0.95, np.pi / 4, 128
    rng = np.random.default_rng(5)
    ks = -np.pi + 2 * np.pi * np.arange(n_k) / n_k
    states = [band_state(k, phi, eta) * np.exp(1j * rng.uniform(0, 2 * np.pi)) for k in ks]
    prod = 1.0 + 0.0j
    for i in range(n_k):
        prod *= np.vdot(states[i], states[(i + 1) % n_k])
    manual = float(np.angle(prod))
    assert abs(manual - zak_phase(phi, eta, n_k=n_k)) <= 1e-10


def test_zak_phase_converges_under_grid_doubling():
    z1 = zak_phase(np.pi / 4, 0.95, n_k=4096)
    z2 = zak_phase(np.pi / 4, 0.95, n_k=8192)
    assert abs(z1 - z2) < 1e-8


def test_zak_phase_requires_minimum_grid():
    with pytest.raises(ValueError):
        zak_phase(0.3, 0.95, n_k=32)


def test_zak_winding_counts_one_pump_cycle():
    assert ap.zak_winding(0.95, n_k=128, n_phi=48) == 1


def test_chern_number_matches_zak_winding_and_is_grid_stable():
    for grid in (32, 64):
        res = ap.chern_number(0.95, n_k=grid, n_phi=grid)
        assert res.chern == 1
        assert res.grid == (grid, grid)
        assert res.min_gap_on_grid == pytest.approx(2 * 0.95, abs=1e-12)
        fluxes = res.plaquette_fluxes
        assert fluxes.shape == (grid, grid)
        assert fluxes.max() <= np.pi and fluxes.min() > -np.pi
        assert fluxes.sum() / (2 * np.pi) == pytest.approx(1.0, abs=1e-10)
    assert ap.chern_number(0.5).chern == 1
    assert ap.chern_number(0.95).chern == ap.zak_winding(0.95)


def test_chern_number_undefined_at_zero_coupling():
    with pytest.raises(GapClosureError):
        ap.chern_number(0.0)


def test_driven_pump_quantized_and_orientation_sensitive():
    dn = ap.driven_rmm_pump(0.5, 200.0, 0.02, 32)
    assert abs(dn - 1.0) < 0.01
    reverse = ap.driven_rmm_pump(0.5, 200.0, 0.02, 32, reverse=True)
    assert abs(dn + reverse) < 1e-6
    off = ap.driven_rmm_pump(0.5, 200.0, 0.02, 32, gamma_offset=1.0)
    assert abs(off) < 0.01


def test_driven_pump_warns_when_not_adiabatic():
    with pytest.warns(UserWarning):
        ap.driven_rmm_pump(0.5, 5.0, 0.01, 8)
