"""Exact-diagonalization and mean-field toolkit for a fermion ring pumped by a precessing central spin."""

__version__ = "0.1.0"

from .hilbert import (
    FermionBasis,
    OperatorMatrix,
    ProductBasis,
    SpinBasis,
    build_fermion_basis,
    embed,
    fermion_bilinear,
    spin_matrices,
)
from .model import (
    DisorderRealization,
    ModelParams,
    add_onsite_disorder,
    build_coupled_hamiltonian,
    build_current_operator,
    build_rmm_hamiltonian,
    rmm_single_particle,
)
from .analysis import (
    CorrelationSeries,
    DisorderEnsemble,
    SelectedState,
    Spectrum,
    TransportRecord,
    diagonalize,
    disorder_ensemble,
    extract_omega_tilde,
    particle_hole_gap,
    select_min_fermion_energy,
    spin_gap,
    stationary_current,
    transport_per_period,
    two_time_correlation,
)
from .meanfield import (
    BackactionField,
    MFState,
    MFTrajectory,
    compute_backaction,
    critical_field_lower,
    critical_field_upper,
    initial_state,
    integrate_mf,
    mf_fermion_matrix,
    winding_number,
)
from .topology import (
    BlochMatrix,
    ChernResult,
    band_energy,
    band_state,
    bloch_h,
    chern_number,
    driven_rmm_pump,
    zak_phase,
    zak_winding,
)
