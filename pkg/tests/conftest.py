import pytest

import autopump as ap


@pytest.fixture(scope="session")
def canonical():
    """The desk-scale reference point: S=10, L=8, N=4, eta=0.95, omega=0.25J."""
    params = ap.ModelParams(S=10, L=8, N=4, eta=0.95, omega=0.25)
    basis = params.product_basis()
    H = ap.build_coupled_hamiltonian(params, basis)
    spectrum = ap.diagonalize(H, check="full")
    state = ap.select_min_fermion_energy(spectrum, params.omega)
    return params, basis, H, spectrum, state
