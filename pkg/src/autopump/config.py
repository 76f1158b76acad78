"""Run configuration for the batch experiment commands.

A run is configured by a single flat JSON document; every field has the
default listed below, unknown keys are rejected, and the CLI flags --out,
--seed and --workers override out_dir, base_seed and workers one-to-one.

    S                          10.0     spin magnitude (half-integers allowed)
    L                          8        lattice sites (even)
    N                          null     fermion number; null means half filling L/2
    eta                        0.95     coupling strength, 0 <= eta < 1
    omega                      0.25     magnetic field / nominal precession frequency
    J                          1.0      hopping scale, the unit of energy
    Delta                      null     on-site coupling scale; null means J
    omega_range                [0.05, 2.0, 0.05]   scan grid: start, stop, step (stop inclusive)
    S_list                     [2, 4, 6, 8, 10, 14, 20]   spin sweep for the phase diagram
    epsilon0_list              [0.0, 0.05, 0.1, 0.2, 0.3, 0.5]   disorder amplitudes / J
    realizations               50       disorder realizations per amplitude
    base_seed                  12345    realization r uses seed base_seed + r
    corr_periods               40       correlation window, nominal periods
    corr_samples_per_period    64       correlation sampling density
    chern_n_k                  64       k grid for the invariant
    chern_n_phi                64       phi grid for the invariant
    zak_n_k                    256      k grid for Zak-phase cross-checks
    mf_dt                      0.005    mean-field integrator step (units 1/J)
    mf_periods                 10.0     mean-field trajectory length, nominal periods
    mf_spin0                   null     initial spin 3-vector; null means (S, 0, 0)
    mf_stride                  20       record every this many integrator steps
    out_dir                    "runs"   artifact directory
    workers                    1        worker processes for sweeps
"""

import dataclasses
import json
from dataclasses import dataclass

from .model import ModelParams


class ConfigError(ValueError):
    """Configuration file or field is invalid."""


@dataclass
class RunConfig:
    S: float = 10.0
    L: int = 8
    N: int = None
    eta: float = 0.95
    omega: float = 0.25
    J: float = 1.0
    Delta: float = None
    omega_range: tuple = (0.05, 2.0, 0.05)
    S_list: tuple = (2, 4, 6, 8, 10, 14, 20)
    epsilon0_list: tuple = (0.0, 0.05, 0.1, 0.2, 0.3, 0.5)
    realizations: int = 50
    base_seed: int = 12345
    corr_periods: int = 40
    corr_samples_per_period: int = 64
    chern_n_k: int = 64
    chern_n_phi: int = 64
    zak_n_k: int = 256
    mf_dt: float = 0.005
    mf_periods: float = 10.0
    mf_spin0: tuple = None
    mf_stride: int = 20
    out_dir: str = "runs"
    workers: int = 1

    def __post_init__(self):
        if self.N is None:
            self.N = self.L // 2
        for name in ("omega_range", "S_list", "epsilon0_list"):
            value = getattr(self, name)
            if value is not None:
                setattr(self, name, tuple(value))
        if self.mf_spin0 is not None:
            self.mf_spin0 = tuple(self.mf_spin0)
        self.validate()

    def validate(self):
        try:
            self.model_params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if len(self.omega_range) != 3 or self.omega_range[2] <= 0:
            raise ConfigError(f"omega_range must be [start, stop, step>0], got {self.omega_range}")
        if not self.S_list or any(s <= 0 for s in self.S_list):
            raise ConfigError(f"S_list entries must be positive, got {self.S_list}")
        if any(e < 0 for e in self.epsilon0_list):
            raise ConfigError(f"epsilon0_list entries must be >= 0, got {self.epsilon0_list}")
        if self.realizations < 1:
            raise ConfigError(f"realizations must be >= 1, got {self.realizations}")
        if self.corr_periods < 1 or self.corr_samples_per_period < 4:
            raise ConfigError("correlation window must span >= 1 period at >= 4 samples/period")
        if min(self.chern_n_k, self.chern_n_phi) < 8:
            raise ConfigError("chern grids must be at least 8x8")
        if self.zak_n_k < 64:
            raise ConfigError(f"zak_n_k must be >= 64, got {self.zak_n_k}")
        if self.mf_dt <= 0 or self.mf_periods <= 0 or self.mf_stride < 1:
            raise ConfigError("mf_dt, mf_periods must be positive and mf_stride >= 1")
        if self.mf_spin0 is not None and len(self.mf_spin0) != 3:
            raise ConfigError(f"mf_spin0 must be a 3-vector, got {self.mf_spin0}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

    def model_params(self, S=None, omega=None):
        return ModelParams(S=self.S if S is None else S, L=self.L, N=self.N,
                           eta=self.eta, omega=self.omega if omega is None else omega,
                           J=self.J, Delta=self.Delta)

    def omega_grid(self):
        start, stop, step = self.omega_range
        grid = []
        k = 0
        while True:
            value = start + k * step
            if value > stop + step * 1e-9:
                break
            grid.append(value)
            k += 1
        return tuple(grid)

    def as_dict(self):
        out = dataclasses.asdict(self)
        for key, value in out.items():
            if isinstance(value, tuple):
                out[key] = list(value)
        return out


def load_config(path=None):
    """Parse a JSON config file; returns (RunConfig, raw_text)."""
    if path is None:
        return RunConfig(), "{}"
    try:
        raw = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: line {exc.lineno}, column {exc.colno}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{path}: unknown config field(s) {', '.join(unknown)}")
    try:
        return RunConfig(**data), raw
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
