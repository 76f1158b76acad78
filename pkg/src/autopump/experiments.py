"""Batch experiment commands: each maps one study to CSV/JSON artifacts.

Determinism contract: identical config + seed produce bit-identical CSV bytes
regardless of worker count.  Floats are serialized with the shortest
round-trip decimal representation, sweep rows are ordered by parameter index,
and files are written to a temporary name and atomically renamed.
"""

import dataclasses
import json
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .analysis import (
    NumericalFailure,
    diagonalize,
    disorder_ensemble,
    particle_hole_gap,
    select_min_fermion_energy,
    spin_gap,
    stationary_current,
    transport_per_period,
    two_time_correlation,
    correlation_times,
)
from .config import RunConfig
from .hilbert import embed, spin_matrices
from .meanfield import (
    charge_per_period,
    critical_field_lower,
    critical_field_upper,
    initial_state,
    integrate_mf,
    winding_number,
)
from .model import build_coupled_hamiltonian
from .topology import GapClosureError, chern_number, zak_winding


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(path, payload):
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _manifest(command, cfg, raw_config, started, tasks, outputs, seeds_used=()):
    return {
        "command": command,
        "artifact_version": __version__,
        "config": cfg.as_dict(),
        "config_raw": raw_config,
        "duration_seconds": time.time() - started,
        "tasks": [{"id": tid, "status": status} for tid, status in tasks],
        "seeds_used": list(seeds_used),
        "outputs": outputs,
    }


def _spectrum_state(params):
    basis = params.product_basis()
    H = build_coupled_hamiltonian(params, basis)
    spectrum = diagonalize(H)
    state = select_min_fermion_energy(spectrum, params.omega)
    return basis, H, spectrum, state


def _transport_point(args):
    """One omega point of a transport scan (worker-pool safe)."""
    cfg_dict, S, omega = args
    cfg = RunConfig(**cfg_dict)
    params = cfg.model_params(S=S, omega=omega)
    basis, H, spectrum, state = _spectrum_state(params)
    record = transport_per_period(state, spectrum, params, basis)
    gap = spin_gap(state, spectrum, H, basis)
    return record, gap


def _map_points(cfg, tasks):
    if cfg.workers == 1 or len(tasks) <= 1:
        return [_transport_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(_transport_point, tasks))


def run_spectrum(cfg, out_dir, raw_config="{}"):
    """spectrum.csv: full many-body spectrum, ascending, in units of J."""
    started = time.time()
    params = cfg.model_params()
    basis = params.product_basis()
    spectrum = diagonalize(build_coupled_hamiltonian(params, basis))
    path = os.path.join(out_dir, "spectrum.csv")
    write_csv(path, ["index", "E_over_J"],
              [(i, e / cfg.J) for i, e in enumerate(spectrum.energies)])
    manifest = _manifest("spectrum", cfg, raw_config, started,
                         [("spectrum", "ok")], ["spectrum.csv"])
    write_json(os.path.join(out_dir, "spectrum_manifest.json"), manifest)
    return manifest


def run_transport_scan(cfg, out_dir, raw_config="{}"):
    """transport.csv: transport, renormalized frequency and spin gap per omega."""
    started = time.time()
    grid = cfg.omega_grid()
    if any(w <= 0 for w in grid):
        raise NumericalFailure("transport scan requires a strictly positive omega grid")
    rows, tasks = [], []
    cfg_dict = cfg.as_dict()
    results = _map_points(cfg, [(cfg_dict, cfg.S, w) for w in grid])
    for omega, outcome in zip(grid, results):
        record, gap = outcome
        status = "ok" if record.extraction_ok else "omega_tilde_fallback"
        rows.append((omega / cfg.J, record.omega_tilde / cfg.J, record.current,
                     record.delta_n, gap / cfg.J, status))
        tasks.append((f"omega={omega}", status))
    path = os.path.join(out_dir, "transport.csv")
    write_csv(path, ["omega_over_J", "omega_tilde_over_J", "current", "delta_n",
                     "spin_gap_over_J", "status"], rows)
    manifest = _manifest("transport-scan", cfg, raw_config, started, tasks, ["transport.csv"])
    write_json(os.path.join(out_dir, "transport_manifest.json"), manifest)
    return manifest


def run_phase_diagram(cfg, out_dir, raw_config="{}"):
    """phase.csv: transport per (S, omega) cell, row-major over the (S, omega) grid."""
    started = time.time()
    grid = cfg.omega_grid()
    cfg_dict = cfg.as_dict()
    tasks = [(cfg_dict, S, w) for S in cfg.S_list for w in grid]
    results = _map_points(cfg, tasks)
    rows, statuses = [], []
    for (S, omega), (record, _gap) in zip(
            ((S, w) for S in cfg.S_list for w in grid), results):
        rows.append((S, omega / cfg.J, record.delta_n))
        statuses.append((f"S={S},omega={omega}", "ok" if record.extraction_ok else "omega_tilde_fallback"))
    write_csv(os.path.join(out_dir, "phase.csv"), ["S", "omega_over_J", "delta_n"], rows)
    manifest = _manifest("phase-diagram", cfg, raw_config, started, statuses, ["phase.csv"])
    write_json(os.path.join(out_dir, "phase_manifest.json"), manifest)
    return manifest


def run_spin_correlations(cfg, out_dir, raw_config="{}"):
    """correlations.csv: two-time xx, yy and xy spin correlations in units of S^2."""
    started = time.time()
    params = cfg.model_params()
    basis, H, spectrum, state = _spectrum_state(params)
    sx, sy = (embed(m, None, basis) for m in spin_matrices(basis.spin)[:2])
    period = 2 * np.pi / params.omega
    n = cfg.corr_periods * cfg.corr_samples_per_period
    times = np.arange(n) * (period / cfg.corr_samples_per_period)
    xx = two_time_correlation(spectrum, state, sx, sx, times, "Sx", "Sx")
    yy = two_time_correlation(spectrum, state, sy, sy, times, "Sy", "Sy")
    xy = two_time_correlation(spectrum, state, sx, sy, times, "Sx", "Sy")
    s2 = params.S ** 2
    rows = [(t * cfg.J,
             v_xx.real / s2, v_xx.imag / s2,
             v_yy.real / s2, v_yy.imag / s2,
             v_xy.real / s2, v_xy.imag / s2)
            for t, v_xx, v_yy, v_xy in zip(times, xx.values, yy.values, xy.values)]
    write_csv(os.path.join(out_dir, "correlations.csv"),
              ["t_J", "re_xx", "im_xx", "re_yy", "im_yy", "re_xy", "im_xy"], rows)
    manifest = _manifest("spin-correlations", cfg, raw_config, started,
                         [("correlations", "ok")], ["correlations.csv"])
    write_json(os.path.join(out_dir, "correlations_manifest.json"), manifest)
    return manifest


def run_meanfield(cfg, out_dir, raw_config="{}"):
    """mf_trajectory.csv + mf_summary.json: decoupled spin/orbital dynamics."""
    started = time.time()
    params = cfg.model_params()
    state0 = initial_state(params, spin=cfg.mf_spin0)
    t_end = cfg.mf_periods * 2 * np.pi / params.omega
    traj = integrate_mf(state0, params, cfg.mf_dt, t_end, stride=cfg.mf_stride)
    rows = [(t * cfg.J, s[0], s[1], s[2], b[0], b[1], q)
            for t, s, b, q in zip(traj.times, traj.spins, traj.fields, traj.pumped_charge)]
    write_csv(os.path.join(out_dir, "mf_trajectory.csv"),
              ["t_J", "Sx", "Sy", "Sz", "Bx", "By", "pumped_charge"], rows)
    rate, integer = winding_number(traj, cfg.mf_periods)
    summary = {
        "winding_rate_per_period": rate,
        "winding_number": integer,
        "charge_per_period": charge_per_period(traj, cfg.mf_periods),
        "critical_field_lower_over_J": critical_field_lower(params) / cfg.J,
        "critical_field_upper_over_J": critical_field_upper(params) / cfg.J,
        "spin_norm_drift": traj.spin_norm_drift,
        "gram_drift": traj.gram_drift,
    }
    write_json(os.path.join(out_dir, "mf_summary.json"), summary)
    manifest = _manifest("meanfield", cfg, raw_config, started, [("meanfield", "ok")],
                         ["mf_trajectory.csv", "mf_summary.json"])
    write_json(os.path.join(out_dir, "meanfield_manifest.json"), manifest)
    return manifest


def run_chern(cfg, out_dir, raw_config="{}"):
    """chern.json: lattice invariant with Zak-winding cross-check."""
    started = time.time()
    try:
        if cfg.eta <= 0:
            raise GapClosureError("the invariant needs eta > 0; the bands touch at eta = 0")
        result = chern_number(cfg.eta, cfg.J, cfg.chern_n_k, cfg.chern_n_phi)
        winding = zak_winding(cfg.eta, cfg.J, cfg.zak_n_k, cfg.chern_n_phi)
    except GapClosureError as exc:
        write_json(os.path.join(out_dir, "chern.json"),
                   {"chern": None, "error": str(exc)})
        raise
    payload = {
        "chern": result.chern,
        "grid": list(result.grid),
        "min_gap_on_grid_over_J": result.min_gap_on_grid / cfg.J,
        "zak_winding": winding,
        "consistent": bool(result.chern == winding),
    }
    write_json(os.path.join(out_dir, "chern.json"), payload)
    manifest = _manifest("chern", cfg, raw_config, started, [("chern", "ok")], ["chern.json"])
    write_json(os.path.join(out_dir, "chern_manifest.json"), manifest)
    return manifest


def run_disorder_scan(cfg, out_dir, raw_config="{}"):
    """disorder.csv: disorder-averaged transport per amplitude."""
    started = time.time()
    params = cfg.model_params()
    rows, tasks, seeds = [], [], []
    for eps0 in cfg.epsilon0_list:
        ensemble = disorder_ensemble(params, eps0, cfg.realizations, cfg.base_seed)
        rows.append((eps0 / cfg.J, ensemble.mean_delta_n, ensemble.std_delta_n,
                     cfg.realizations, len(ensemble.failures)))
        tasks.append((f"epsilon0={eps0}",
                      "ok" if not ensemble.failures else f"{len(ensemble.failures)} failures"))
        seeds.extend(real.seed for real in ensemble.realizations)
    write_csv(os.path.join(out_dir, "disorder.csv"),
              ["epsilon0_over_J", "mean_delta_n", "std_delta_n", "R", "failures"], rows)
    manifest = _manifest("disorder-scan", cfg, raw_config, started, tasks,
                         ["disorder.csv"], seeds_used=sorted(set(seeds)))
    write_json(os.path.join(out_dir, "disorder_manifest.json"), manifest)
    return manifest


def run_ph_gap(cfg, out_dir, raw_config="{}"):
    """phgap.csv: particle-hole gap for every ordered site pair."""
    started = time.time()
    params = cfg.model_params()
    basis, H, spectrum, state = _spectrum_state(params)
    rows, tasks = [], []
    for l in range(params.L):
        for m in range(params.L):
            res = particle_hole_gap(state, spectrum, H, l, m, basis)
            flag = "reference" if res.reference else ("ok" if res.valid else "skipped")
            rows.append((l, m, res.gap / cfg.J if res.valid else "nan", flag))
            if not res.valid:
                tasks.append((f"l={l},m={m}", "skipped: excitation annihilates the state"))
    tasks.append(("ph-gap", "ok"))
    write_csv(os.path.join(out_dir, "phgap.csv"), ["l", "m", "gap_over_J", "valid_flag"], rows)
    manifest = _manifest("ph-gap", cfg, raw_config, started, tasks, ["phgap.csv"])
    write_json(os.path.join(out_dir, "phgap_manifest.json"), manifest)
    return manifest


COMMANDS = {
    "spectrum": run_spectrum,
    "transport-scan": run_transport_scan,
    "phase-diagram": run_phase_diagram,
    "spin-correlations": run_spin_correlations,
    "meanfield": run_meanfield,
    "chern": run_chern,
    "disorder-scan": run_disorder_scan,
    "ph-gap": run_ph_gap,
}
