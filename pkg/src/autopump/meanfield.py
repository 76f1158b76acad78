"""Self-consistent classical-spin / single-particle-fermion decoupling.

The spin expectation vector obeys  d<S>/dt = -B(t) x <S>  with

    B(t) = (g J <I>, g J <P>, omega),

where <I> is the staggered current imbalance and <P> the unit-cell
polarization of the occupied orbitals; the orbitals evolve under the
one-body matrix of the staggered ring evaluated at the instantaneous spin
components (gamma = g S_x, on-site Delta g S_y).  Everything is integrated
with one fixed-step RK4 over the combined state, the back-action field
re-evaluated at every substage.

|<S>| and orbital orthonormality are conserved exactly by the continuous
flow, so their drift measures integrator error; trajectories abort when it
exceeds NORM_ABORT.
"""

from dataclasses import dataclass, field

import numpy as np

from .analysis import NumericalFailure
from .model import rmm_single_particle

NORM_ABORT = 1e-6
WINDING_INT_TOL = 0.05


@dataclass(frozen=True)
class MFState:
    spin: np.ndarray
    orbitals: np.ndarray = field(repr=False)
    time: float = 0.0


@dataclass(frozen=True)
class BackactionField:
    bx: float
    by: float
    bz: float

    @property
    def vector(self):
        return np.array([self.bx, self.by, self.bz])


@dataclass(frozen=True)
class MFTrajectory:
    times: np.ndarray = field(repr=False)
    spins: np.ndarray = field(repr=False)
    fields: np.ndarray = field(repr=False)
    pumped_charge: np.ndarray = field(repr=False)
    final_state: MFState
    spin_norm_drift: float
    gram_drift: float


def mf_fermion_matrix(spin, params):
    """One-body matrix seen by the fermions at classical spin components (Sx, Sy, .)."""
    g = params.g
    return rmm_single_particle(params.L, g * spin[0], params.Delta * g * spin[1], params.J)


def compute_backaction(orbitals, params):
    """Effective field (gJ<I>, gJ<P>, omega) exerted on the spin by occupied orbitals."""
    L = params.L
    density = orbitals @ orbitals.conj().T      # density[a, b] = <c^dag_b c_a>
    sites = np.arange(L)
    alt = (-1.0) ** sites
    imbalance = float(np.sum(alt * 2 * np.real(density[(sites + 1) % L, sites])) / 2)
    polarization = float(np.sum(-alt * np.real(density[sites, sites])))
    return BackactionField(bx=params.g * params.J * imbalance,
                           by=params.g * params.J * polarization,
                           bz=params.omega)


def initial_state(params, spin=None):
    """Spin in the plane at full length (S, 0, 0) by default; orbitals fill the
    lowest half of the instantaneous one-body spectrum."""
    spin = np.array([params.S, 0.0, 0.0]) if spin is None else np.asarray(spin, dtype=float)
    w, v = np.linalg.eigh(mf_fermion_matrix(spin, params))
    return MFState(spin=spin, orbitals=v[:, : params.N].astype(complex), time=0.0)


def _bond0_current(spin, orbitals, params):
    cdag1_c0 = np.sum(orbitals[0] * orbitals[1].conj())
    coef = 1 + params.g * spin[0]
    return float(np.real(-1j * (params.J / 2) * coef * (cdag1_c0 - cdag1_c0.conjugate())))


def integrate_mf(initial, params, dt, t_end, stride=1):
    """Fixed-step RK4 of the coupled spin + orbital system up to t_end."""
    max_dt = 0.01 * min(2 * np.pi / params.omega if params.omega > 0 else np.inf,
                        2 * np.pi / params.J)
    if dt > max_dt * (1 + 1e-9):
        raise ValueError(f"dt={dt} too coarse; needs dt <= {max_dt:.4g} to resolve "
                         "both the precession and the band dynamics")
    n_steps = max(1, int(round((t_end - initial.time) / dt)))
    step = (t_end - initial.time) / n_steps

    def derivs(spin, orbitals):
        b = compute_backaction(orbitals, params).vector
        dspin = -np.cross(b, spin)
        dorb = -1j * (mf_fermion_matrix(spin, params) @ orbitals)
        return dspin, dorb, b

    spin = initial.spin.copy()
    orbitals = initial.orbitals.copy()
    s_mag = float(np.linalg.norm(spin))
    eye_n = np.eye(orbitals.shape[1])

    times = [initial.time]
    spins = [spin.copy()]
    b0 = compute_backaction(orbitals, params)
    fields = [(b0.bx, b0.by)]
    charges = [0.0]
    charge = 0.0
    cur_prev = _bond0_current(spin, orbitals, params)
    spin_drift = 0.0
    gram_drift = 0.0
    t = initial.time
    for k in range(1, n_steps + 1):
        d1s, d1o, b = derivs(spin, orbitals)
        d2s, d2o, _ = derivs(spin + 0.5 * step * d1s, orbitals + 0.5 * step * d1o)
        d3s, d3o, _ = derivs(spin + 0.5 * step * d2s, orbitals + 0.5 * step * d2o)
        d4s, d4o, _ = derivs(spin + step * d3s, orbitals + step * d3o)
        spin = spin + (step / 6) * (d1s + 2 * d2s + 2 * d3s + d4s)
        orbitals = orbitals + (step / 6) * (d1o + 2 * d2o + 2 * d3o + d4o)
        t = initial.time + k * step
        cur = _bond0_current(spin, orbitals, params)
        charge += 0.5 * step * (cur_prev + cur)
        cur_prev = cur
        spin_drift = max(spin_drift, abs(np.linalg.norm(spin) / s_mag - 1.0))
        gram_drift = max(gram_drift, float(np.abs(orbitals.conj().T @ orbitals - eye_n).max()))
        if spin_drift > NORM_ABORT or gram_drift > NORM_ABORT:
            raise NumericalFailure(
                f"norm drift exceeded {NORM_ABORT} at t={t:.4f} "
                f"(|S| drift {spin_drift:.2e}, Gram defect {gram_drift:.2e}); reduce dt")
        if k % stride == 0 or k == n_steps:
            bnow = compute_backaction(orbitals, params)
            times.append(t)
            spins.append(spin.copy())
            fields.append((bnow.bx, bnow.by))
            charges.append(charge)
    return MFTrajectory(
        times=np.array(times),
        spins=np.array(spins),
        fields=np.array(fields),
        pumped_charge=np.array(charges),
        final_state=MFState(spin=spin, orbitals=orbitals, time=t),
        spin_norm_drift=spin_drift,
        gram_drift=gram_drift,
    )


def winding_number(trajectory, n_periods):
    """Net turns of the in-plane spin per nominal period, positive in the
    precession sense induced by omega > 0 (azimuth atan2(Sy, Sx) decreasing).

    Returns (rate, integer); integer is None when the rate is not within
    WINDING_INT_TOL of an integer.
    """
    angles = np.unwrap(np.arctan2(trajectory.spins[:, 1], trajectory.spins[:, 0]))
    rate = -(angles[-1] - angles[0]) / (2 * np.pi) / n_periods
    nearest = int(round(rate))
    return float(rate), (nearest if abs(rate - nearest) <= WINDING_INT_TOL else None)


def charge_per_period(trajectory, n_periods):
    """Pumped charge through bond 0 per nominal period, positive in the
    package transport direction (same convention as the ED bond current)."""
    return float(trajectory.pumped_charge[-1]) / n_periods


def critical_field_lower(params):
    """Worst-case back-action bound: the field must beat g J N to keep precessing."""
    return params.eta * params.N * params.J / params.S


def critical_field_upper(params, in_plane_fraction=1.0):
    """Adiabaticity bound 2 eta J scaled by the in-plane spin projection fraction."""
    if not 0 <= in_plane_fraction <= 1:
        raise ValueError(f"fraction must lie in [0, 1], got {in_plane_fraction}")
    return 2 * params.eta * params.J * in_plane_fraction
