"""Hamiltonians and observables of the spin-controlled staggered lattice.

The coupled Hamiltonian on a periodic ring of L sites (site indices 0-based,
sublattice sign (-1)^j) with a central spin of magnitude S:

    H = -omega * S_z
        - (J/2) * sum_j (1 + (-1)^j g S_x) (c^dag_j c_{j+1} + h.c.)
        + Delta * sum_j (-1)^j g S_y n_j,          g = eta / S.

Current convention: ``build_current_operator`` returns

    J_l = -i (J/2) (1 + (-1)^l g S_x) (c^dag_{l+1} c_l - c^dag_l c_{l+1}),

which counts transport as positive in the direction the pump moves particles
for omega > 0.  Particle-number balance then reads  i[H, n_l] = J_l - J_{l-1}
as an exact matrix identity (the J/2 prefactor is fixed by that identity).
"""

from dataclasses import dataclass, field

import numpy as np

from .hilbert import (
    BasisMismatchError,
    OperatorMatrix,
    ProductBasis,
    build_fermion_basis,
    embed,
    fermion_bilinear,
    spin_matrices,
    SpinBasis,
)


@dataclass(frozen=True)
class ModelParams:
    """Couplings of the spin-fermion ring; J sets the unit of energy (hbar = 1).

    Delta defaults to J.  eta = 0 is allowed so the decoupled limit can be
    built exactly (g = eta/S is then 0).
    """

    S: float = 10.0
    L: int = 8
    N: int = 4
    eta: float = 0.95
    omega: float = 0.25
    J: float = 1.0
    Delta: float = None

    def __post_init__(self):
        if self.Delta is None:
            object.__setattr__(self, "Delta", self.J)
        if self.J <= 0:
            raise ValueError(f"J must be positive, got {self.J}")
        if not 0 <= self.eta < 1:
            raise ValueError(f"eta must lie in [0, 1), got {self.eta}")
        if self.omega < 0:
            raise ValueError(f"omega must be non-negative, got {self.omega}")
        if self.S <= 0:
            raise ValueError(f"S must be positive, got {self.S}")
        if self.L <= 0 or self.L % 2 != 0:
            raise ValueError(f"L must be a positive even integer, got {self.L}")
        if not 0 <= self.N <= self.L:
            raise ValueError(f"N must lie in 0..{self.L}, got {self.N}")

    @property
    def g(self):
        return self.eta / self.S

    def product_basis(self):
        return ProductBasis(spin=SpinBasis(self.S), fermion=build_fermion_basis(self.L, self.N))


@dataclass(frozen=True)
class DisorderRealization:
    """One draw of on-site energies 0 <= eps_j <= eps_0 (box distribution)."""

    epsilons: np.ndarray
    epsilon0: float
    seed: int

    @classmethod
    def sample(cls, L, epsilon0, seed):
        rng = np.random.default_rng(seed)
        return cls(epsilons=rng.uniform(0.0, epsilon0, L), epsilon0=epsilon0, seed=seed)


def _check_basis(params, basis):
    if basis.fermion.L != params.L or basis.fermion.N != params.N:
        raise BasisMismatchError(
            f"basis is (L={basis.fermion.L}, N={basis.fermion.N}), "
            f"params are (L={params.L}, N={params.N})")
    if abs(basis.spin.S - params.S) > 1e-12:
        raise BasisMismatchError(f"basis has S={basis.spin.S}, params have S={params.S}")


def _hop_matrix(fbasis, j):
    """c^dag_j c_{j+1} + h.c. on the periodic ring."""
    t = fermion_bilinear(fbasis, (j + 1) % fbasis.L, j).matrix
    return t + t.T


def build_coupled_hamiltonian(params, basis):
    """Full spin-fermion Hamiltonian on the ProductBasis (periodic ring)."""
    _check_basis(params, basis)
    fb = basis.fermion
    sx, sy, sz, _, _ = spin_matrices(basis.spin)
    hop_uniform = np.zeros((fb.dimension, fb.dimension))
    hop_stag = np.zeros_like(hop_uniform)
    pol = np.zeros_like(hop_uniform)
    for j in range(params.L):
        hop = _hop_matrix(fb, j)
        hop_uniform += hop
        hop_stag += (-1) ** j * hop
        pol += (-1) ** j * fermion_bilinear(fb, j, j).matrix
    g = params.g
    mat = (-params.omega * np.kron(sz.matrix, np.eye(fb.dimension))
           - (params.J / 2) * np.kron(np.eye(basis.spin.dimension), hop_uniform)
           - (params.J * g / 2) * np.kron(sx.matrix, hop_stag)
           + params.Delta * g * np.kron(sy.matrix, pol))
    return OperatorMatrix(basis=basis, matrix=mat, hermitian=True)


def rmm_single_particle(L, gamma, delta_val, J=1.0):
    """L x L one-body matrix of the staggered ring: hopping -(J/2)(1 + (-1)^j gamma)
    on bond (j, j+1), on-site (-1)^j delta_val."""
    h = np.zeros((L, L), dtype=complex)
    for j in range(L):
        jp = (j + 1) % L
        amp = -(J / 2) * (1 + (-1) ** j * gamma)
        h[jp, j] += amp
        h[j, jp] += amp
        h[j, j] += (-1) ** j * delta_val
    return h


def build_rmm_hamiltonian(params, gamma, delta_val, basis):
    """Many-body staggered-ring Hamiltonian at frozen c-number (gamma, delta_val)."""
    L = basis.L
    hop_uniform = np.zeros((basis.dimension, basis.dimension))
    hop_stag = np.zeros_like(hop_uniform)
    pol = np.zeros_like(hop_uniform)
    for j in range(L):
        hop = _hop_matrix(basis, j)
        hop_uniform += hop
        hop_stag += (-1) ** j * hop
        pol += (-1) ** j * fermion_bilinear(basis, j, j).matrix
    mat = -(params.J / 2) * (hop_uniform + gamma * hop_stag) + delta_val * pol
    return OperatorMatrix(basis=basis, matrix=mat.astype(complex), hermitian=True)


def add_onsite_disorder(H, realization, basis):
    """H + sum_j eps_j n_j (fermion number operators lifted with the spin identity)."""
    L = basis.fermion.L
    if len(realization.epsilons) != L:
        raise ValueError(f"realization has {len(realization.epsilons)} site energies, L={L}")
    diag = np.zeros(basis.fermion.dimension)
    for j in range(L):
        diag += realization.epsilons[j] * np.diag(fermion_bilinear(basis.fermion, j, j).matrix)
    mat = H.matrix + np.diag(np.tile(diag, basis.spin.dimension))
    return OperatorMatrix(basis=basis, matrix=mat, hermitian=H.hermitian)


def build_current_operator(l, params, basis):
    """Bond current J_l between sites l and l+1 (see module docstring for the sign)."""
    _check_basis(params, basis)
    if not 0 <= l < params.L:
        raise ValueError(f"bond index must lie in 0..{params.L - 1}, got {l}")
    fb = basis.fermion
    t = fermion_bilinear(fb, (l + 1) % params.L, l).matrix   # c^dag_{l+1} c_l
    sx = spin_matrices(basis.spin)[0].matrix
    coef = np.eye(basis.spin.dimension) + (-1) ** l * params.g * sx
    mat = -1j * (params.J / 2) * np.kron(coef, t - t.T)
    return OperatorMatrix(basis=basis, matrix=mat, hermitian=True)


def number_operator(j, basis):
    """n_j on the ProductBasis (diagonal)."""
    return embed(None, fermion_bilinear(basis.fermion, j, j), basis)
