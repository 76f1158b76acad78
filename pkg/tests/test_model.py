from itertools import combinations

import numpy as np
import pytest
import scipy.linalg

from autopump.hilbert import build_fermion_basis, embed, fermion_bilinear, spin_matrices
from autopump.model import (
    DisorderRealization,
    ModelParams,
    add_onsite_disorder,
    build_coupled_hamiltonian,
    build_current_operator,
    build_rmm_hamiltonian,
    number_operator,
    rmm_single_particle,
)

TOL = 1e-12


@pytest.fixture(scope="module")
def small():
    params = ModelParams(S=1, L=4, N=2, eta=0.5, omega=0.3)
    basis = params.product_basis()
    return params, basis, build_coupled_hamiltonian(params, basis)


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(S=1, L=5, N=2, eta=0.5, omega=0.1)
    with pytest.raises(ValueError):
        ModelParams(S=1, L=4, N=2, eta=1.0, omega=0.1)
    with pytest.raises(ValueError):
        ModelParams(S=1, L=4, N=2, eta=0.5, omega=-0.1)
    with pytest.raises(ValueError):
        ModelParams(S=0, L=4, N=2, eta=0.5, omega=0.1)
    p = ModelParams(S=4, L=4, N=2, eta=0.8, omega=0.1)
    assert p.Delta == p.J
    assert p.g * p.S == pytest.approx(p.eta, abs=0)


def test_coupled_hamiltonian_is_hermitian(small):
    _, _, H = small
    assert H.hermitian
    assert np.abs(H.matrix - H.matrix.conj().T).max() <= TOL


def test_decoupled_limit_spectrum_is_tensor_sum():
    # independent oracle: plane-wave subset sums plus Zeeman ladder
    params = ModelParams(S=1.5, L=4, N=2, eta=0.0, omega=0.37)
    basis = params.product_basis()
    H = build_coupled_hamiltonian(params, basis)
    energies = np.linalg.eigvalsh(H.matrix)
    single = [-params.J * np.cos(2 * np.pi * n / params.L) for n in range(params.L)]
    fermion_sums = [sum(c) for c in combinations(single, params.N)]
    oracle = sorted(-params.omega * m + ef
                    for m in (-1.5, -0.5, 0.5, 1.5) for ef in fermion_sums)
    assert np.abs(energies - np.array(oracle)).max() <= 1e-10


def _translation_matrix(basis):
    """Translation by one site on the fixed-N basis, with the fermionic
    reordering sign (-1)^((N-1) * n_{L-1})."""
    L, N = basis.L, basis.N
    dim = basis.dimension
    mask = (1 << L) - 1
    mat = np.zeros((dim, dim))
    for col, s in enumerate(basis.states):
        wrapped = (s >> (L - 1)) & 1
        target = ((s << 1) | wrapped) & mask
        sign = (-1) ** ((N - 1) * wrapped)
        mat[basis.index_of[target], col] = sign
    return mat


def test_translation_matrix_shifts_bilinears():
    basis = build_fermion_basis(4, 2)
    t_op = _translation_matrix(basis)
    assert np.abs(t_op @ t_op.T - np.eye(basis.dimension)).max() <= TOL
    for l, m in ((0, 1), (3, 0), (2, 2), (1, 3)):
        moved = t_op @ fermion_bilinear(basis, l, m).matrix @ t_op.T
        target = fermion_bilinear(basis, (l + 1) % 4, (m + 1) % 4).matrix
        assert np.abs(moved - target).max() <= TOL


@pytest.mark.parametrize("S", [1, 1.5])
def test_coupled_commutes_with_translation_times_pi_rotation(S):
    params = ModelParams(S=S, L=4, N=2, eta=0.7, omega=0.4)
    basis = params.product_basis()
    H = build_coupled_hamiltonian(params, basis).matrix
    rot = np.diag(np.exp(1j * np.pi * basis.spin.levels))
    u = np.kron(rot, _translation_matrix(basis.fermion))
    assert np.abs(H @ u - u @ H).max() <= TOL


def test_rmm_two_site_bloch_gap():
    # half-filling single-particle gap equals 2 sqrt(J^2 gamma^2 + delta^2)
    L = 8
    for gamma, dval in ((0.3, 0.0), (0.0, 0.45), (0.25, 0.4)):
        energies = np.linalg.eigvalsh(rmm_single_particle(L, gamma, dval))
        gap = energies[L // 2] - energies[L // 2 - 1]
        assert gap == pytest.approx(2 * np.sqrt(gamma ** 2 + dval ** 2), abs=1e-12)


def test_rmm_uniform_chain_plane_waves():
    L = 8
    energies = np.sort(np.linalg.eigvalsh(rmm_single_particle(L, 0.0, 0.0)))
    oracle = np.sort([-np.cos(2 * np.pi * n / L) for n in range(L)])
    assert np.abs(energies - oracle).max() <= 1e-12


def test_rmm_fully_dimerized():
    L = 8
    energies = np.sort(np.linalg.eigvalsh(rmm_single_particle(L, 1.0, 0.0)))
    oracle = np.sort([-1.0] * (L // 2) + [1.0] * (L // 2))
    assert np.abs(energies - oracle).max() <= 1e-12


def test_rmm_many_body_matches_single_particle_sums():
    basis = build_fermion_basis(4, 2)
    params = ModelParams(S=1, L=4, N=2, eta=0.5, omega=0.0)
    H = build_rmm_hamiltonian(params, 0.35, 0.2, basis)
    assert H.hermitian
    many = np.linalg.eigvalsh(H.matrix)
    single = np.linalg.eigvalsh(rmm_single_particle(4, 0.35, 0.2))
    oracle = sorted(sum(c) for c in combinations(single, 2))
    assert np.abs(many - np.array(oracle)).max() <= 1e-10


def test_disorder_sampling_bounds_and_reproducibility():
    real = DisorderRealization.sample(8, 0.1, seed=42)
    assert real.epsilons.shape == (8,)
    assert np.all(real.epsilons >= 0.0) and np.all(real.epsilons <= 0.1)
    again = DisorderRealization.sample(8, 0.1, seed=42)
    assert np.array_equal(real.epsilons, again.epsilons)
    other = DisorderRealization.sample(8, 0.1, seed=43)
    assert not np.array_equal(real.epsilons, other.epsilons)


def test_zero_disorder_is_identity(small):
    params, basis, H = small
    real = DisorderRealization(epsilons=np.zeros(4), epsilon0=0.0, seed=0)
    assert np.abs(add_onsite_disorder(H, real, basis).matrix - H.matrix).max() == 0.0


def test_uniform_disorder_shifts_spectrum_by_cN(small):
    params, basis, H = small
    c = 0.17
    real = DisorderRealization(epsilons=np.full(4, c), epsilon0=c, seed=0)
    shifted = add_onsite_disorder(H, real, basis)
    e0 = np.linalg.eigvalsh(H.matrix)
    e1 = np.linalg.eigvalsh(shifted.matrix)
    assert np.abs(e1 - (e0 + c * params.N)).max() <= 1e-10


def test_disorder_length_mismatch_rejected(small):
    params, basis, H = small
    real = DisorderRealization(epsilons=np.zeros(6), epsilon0=0.0, seed=0)
    with pytest.raises(ValueError):
        add_onsite_disorder(H, real, basis)


def test_continuity_identity(small):
    # particle-number balance: i[H, n_l] = J_l - J_{l-1}, exactly
    params, basis, H = small
    for l in range(params.L):
        n_l = number_operator(l, basis).matrix
        lhs = 1j * (H.matrix @ n_l - n_l @ H.matrix)
        rhs = (build_current_operator(l, params, basis).matrix
               - build_current_operator((l - 1) % params.L, params, basis).matrix)
        assert np.abs(lhs - rhs).max() <= TOL


def test_current_operator_hermitian(small):
    params, basis, _ = small
    for l in range(params.L):
        op = build_current_operator(l, params, basis)
        assert op.hermitian


def test_current_vanishes_in_decoupled_ground_state():
    params = ModelParams(S=1, L=4, N=2, eta=0.0, omega=0.0)
    basis = params.product_basis()
    H = build_coupled_hamiltonian(params, basis)
    _, vecs = scipy.linalg.eigh(H.matrix)
    ground = vecs[:, 0]
    current = build_current_operator(0, params, basis).matrix
    assert abs(ground.conj() @ current @ ground) <= 1e-10


def test_current_bond_independent_in_eigenstates(small):
    params, basis, H = small
    energies, vecs = scipy.linalg.eigh(H.matrix)
    ops = [build_current_operator(l, params, basis).matrix for l in range(params.L)]
    # pick a few non-degenerate interior eigenstates
    for n in (0, 5, 11):
        psi = vecs[:, n]
        vals = [float(np.real(psi.conj() @ op @ psi)) for op in ops]
        assert max(vals) - min(vals) <= 1e-10


def test_number_conservation(small):
    params, basis, H = small
    total_n = sum(number_operator(j, basis).matrix for j in range(params.L))
    assert np.abs(H.matrix @ total_n - total_n @ H.matrix).max() <= TOL
