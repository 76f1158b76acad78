"""Bases and elementary operators for a central spin coupled to lattice fermions.

Conventions (fixed once, used everywhere):
  * fermion site j is bit j of the occupation pattern (site 0 = least
    significant bit); sign strings are counted over ascending site index,
  * fermion basis states are ordered by increasing bit-pattern value,
  * spin levels are ordered by increasing magnetic quantum number m,
  * composite index = spin_index * fermion_dim + fermion_index, which is
    what ``numpy.kron(spin_op, fermion_op)`` produces.
"""

from dataclasses import dataclass, field
from math import comb

import numpy as np

# algebraic identities (commutators, Hermiticity, ...) are exact up to rounding
ALGEBRA_TOL = 1e-12


class BasisMismatchError(ValueError):
    """Operator and basis (or two operator factors) do not belong together."""


@dataclass(frozen=True)
class FermionBasis:
    """Fixed particle-number sector of spinless fermions on L sites."""

    L: int
    N: int
    states: tuple
    index_of: dict = field(repr=False)

    @property
    def dimension(self):
        return len(self.states)


@dataclass(frozen=True)
class SpinBasis:
    """Single spin of magnitude S in the S_z eigenbasis, levels m = -S..S ascending."""

    S: float

    def __post_init__(self):
        two_s = 2 * self.S
        if self.S < 0 or abs(two_s - round(two_s)) > 1e-12:
            raise ValueError(f"S must be a non-negative (half-)integer, got {self.S}")

    @property
    def dimension(self):
        return int(round(2 * self.S)) + 1

    @property
    def levels(self):
        return -self.S + np.arange(self.dimension)


@dataclass(frozen=True)
class ProductBasis:
    """(spin level) x (fermion configuration) composite basis."""

    spin: SpinBasis
    fermion: FermionBasis

    @property
    def dimension(self):
        return self.spin.dimension * self.fermion.dimension

    def flatten(self, spin_index, fermion_index):
        return spin_index * self.fermion.dimension + fermion_index

    def unflatten(self, composite_index):
        return divmod(composite_index, self.fermion.dimension)


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense complex matrix over a basis; treat as immutable once built."""

    basis: object
    matrix: np.ndarray = field(repr=False)
    hermitian: bool = False

    def __post_init__(self):
        if self.hermitian:
            defect = np.abs(self.matrix - self.matrix.conj().T).max()
            if defect > ALGEBRA_TOL:
                raise ValueError(f"hermitian flag set but defect {defect:.2e} > {ALGEBRA_TOL}")

    @property
    def dimension(self):
        return self.matrix.shape[0]


def build_fermion_basis(L, N):
    """All occupation patterns of N fermions on L sites, ascending by pattern value."""
    if L <= 0 or L % 2 != 0:
        raise ValueError(f"L must be a positive even integer, got {L}")
    if not 0 <= N <= L:
        raise ValueError(f"N must lie in 0..{L}, got {N}")
    states = tuple(s for s in range(1 << L) if bin(s).count("1") == N)
    assert len(states) == comb(L, N)
    return FermionBasis(L=L, N=N, states=states, index_of={s: i for i, s in enumerate(states)})


def _string_sign(pattern, site):
    """(-1)^(number of occupied sites below `site`), the Jordan-Wigner string."""
    return -1 if bin(pattern & ((1 << site) - 1)).count("1") & 1 else 1


def fermion_bilinear(basis, l, m):
    """Matrix of c^dag_l c_m in the fixed-N sector (real entries, signs included).

    The string sign of each elementary operator is accumulated on the state
    it acts on, so l < m, l > m and l = m (occupation number) all come out
    with the standard anticommutation phases.
    """
    L = basis.L
    if not (0 <= l < L and 0 <= m < L):
        raise ValueError(f"sites must lie in 0..{L - 1}, got l={l}, m={m}")
    dim = basis.dimension
    out = np.zeros((dim, dim))
    for col, s in enumerate(basis.states):
        if not (s >> m) & 1:
            continue
        sign = _string_sign(s, m)
        s1 = s ^ (1 << m)
        if (s1 >> l) & 1:
            continue
        sign *= _string_sign(s1, l)
        out[basis.index_of[s1 | (1 << l)], col] = sign
    return OperatorMatrix(basis=basis, matrix=out, hermitian=(l == m))


def spin_matrices(basis):
    """Angular-momentum matrices (Sx, Sy, Sz, S+, S-) in the S_z eigenbasis.

    Ladder convention <m+1|S+|m> = sqrt(S(S+1) - m(m+1)) >= 0.
    """
    S = basis.S
    dim = basis.dimension
    m = basis.levels
    sz = np.diag(m).astype(complex)
    sp = np.zeros((dim, dim), dtype=complex)
    for k in range(dim - 1):
        sp[k + 1, k] = np.sqrt(S * (S + 1) - m[k] * (m[k] + 1))
    sm = sp.conj().T
    sx = 0.5 * (sp + sm)
    sy = -0.5j * (sp - sm)
    wrap = lambda mat, herm: OperatorMatrix(basis=basis, matrix=mat, hermitian=herm)
    return wrap(sx, True), wrap(sy, True), wrap(sz, True), wrap(sp, False), wrap(sm, False)


def embed(spin_op, fermion_op, basis):
    """Kronecker product lifting factor operators to the ProductBasis.

    Either factor may be ``None`` for the identity on that factor.
    """
    sdim = basis.spin.dimension
    fdim = basis.fermion.dimension
    if spin_op is None:
        smat, sherm = np.eye(sdim), True
    else:
        if spin_op.matrix.shape != (sdim, sdim):
            raise BasisMismatchError(
                f"spin factor is {spin_op.matrix.shape}, basis expects ({sdim}, {sdim})")
        smat, sherm = spin_op.matrix, spin_op.hermitian
    if fermion_op is None:
        fmat, fherm = np.eye(fdim), True
    else:
        if fermion_op.matrix.shape != (fdim, fdim):
            raise BasisMismatchError(
                f"fermion factor is {fermion_op.matrix.shape}, basis expects ({fdim}, {fdim})")
        fmat, fherm = fermion_op.matrix, fermion_op.hermitian
    return OperatorMatrix(basis=basis, matrix=np.kron(smat, fmat), hermitian=sherm and fherm)
