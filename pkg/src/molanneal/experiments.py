"""Scripted reproductions of the figure-level results.

Each function returns plain arrays or small dataclasses; writing files is
left to :mod:`molanneal.export` and the CLI.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache
from math import comb

import numpy as np

from molanneal.coupling import (
    PairGeometry,
    WindowError,
    find_E_perp,
    find_E_z,
    pair_couplings,
)
from molanneal.dynamics import AnnealResult, Annealer, Schedule
from molanneal.lattice import (
    LatticeConfig,
    brute_force_ground,
    build_coupling_tables,
    chain_1d,
    effective_ising,
    grid_2d,
    stack_3d,
    two_qubit_rectangle,
)
from molanneal.molecule import (
    SRF,
    SRI,
    FieldPoint,
    MoleculeConstants,
    NoMinimumError,
    TrackedSpectrum,
    find_avoided_crossing,
    track_spectrum,
)

log = logging.getLogger(__name__)

DEFAULT_TIMES_MS = (5.0, 10.0, 15.0, 20.0, 25.0)
SIZE_CEILING = comb(16, 8)
OPT_IN_CEILING = comb(18, 9)
STEPS_1D = 200
STEPS_2D = 100


class SizeCeilingError(ValueError):
    pass


@lru_cache(maxsize=64)
def working_fields(mol: MoleculeConstants = SRF, B: float = 600.0, n_max: int = 5) -> tuple[float, float]:
    """(E_perp, E_z) in kV/cm."""
    E_perp = find_E_perp(mol, B, n_max=n_max)
    return E_perp, find_E_z(mol, B, E_perp=E_perp, n_max=n_max)


def check_size(config: LatticeConfig, allow_large: bool = False) -> int:
    n = len(config.dynamic)
    dim = comb(n, n // 2)
    limit = OPT_IN_CEILING if allow_large else SIZE_CEILING
    if dim > limit:
        raise SizeCeilingError(f"sector dimension {dim} exceeds ceiling {limit}" + ("" if allow_large else " (opt-in required)"))
    return dim


# ------------------------------------------------------------ single molecule


def spectrum(mol: MoleculeConstants = SRF, B: float = 538.0, E_max: float = 2.0, n_points: int = 201,
             n_states: int = 5, n_max: int = 5) -> tuple[TrackedSpectrum, float]:
    """Tracked low-lying levels vs E and the beta-gamma crossing field."""
    grid = np.linspace(0.0, E_max, n_points)
    ts = track_spectrum(mol, B, grid, n_max=n_max, n_states=n_states, max_refine=6)
    try:
        E_x, _ = find_avoided_crossing(mol, B, bracket=(0.0, E_max), n_max=n_max)
    except NoMinimumError:
        E_x = float("nan")
    return ts, E_x


@dataclass
class CouplingScan:
    rows: list[tuple]  # (E, B, R, theta, J_perp, J_z, W, K, V)
    name: str = ""

    def column(self, k: int) -> np.ndarray:
        return np.array([r[k] for r in self.rows])


def coupling_scan(mol: MoleculeConstants, B: float, E_grid, R: float = 500.0, theta: float = np.pi / 2,
                  n_max: int = 5) -> CouplingScan:
    geom = PairGeometry(R, theta)
    rows = []
    for E in E_grid:
        pc = pair_couplings(mol, FieldPoint(float(E), B), geom, n_max=n_max)
        rows.append((float(E), B, R, theta, pc.J_perp, pc.J_z, pc.W, pc.K, pc.V))
    return CouplingScan(rows, mol.name)


def crossing_scans(n_points: int = 201) -> list[CouplingScan]:
    """J_perp and J_z vs E around the crossing for SrF at 600 mT and SrI at 100 mT."""
    out = []
    for mol, B in ((SRF, 600.0), (SRI, 100.0)):
        E_x, _ = find_avoided_crossing(mol, B)
        out.append(coupling_scan(mol, B, np.linspace(0.8 * E_x, 1.2 * E_x, n_points)))
    return out


# --------------------------------------------------------- molecular constants


SCAN_WINDOWS = {"d": (1.0, 10.0), "B_e": (0.1, 0.28), "gamma_SR": (1e-4, 1e-2)}


def default_scan_values(constant: str, per_decade: int = 25) -> np.ndarray:
    lo, hi = SCAN_WINDOWS[constant]
    n = max(2, int(round(per_decade * np.log10(hi / lo))) + 1)
    return np.logspace(np.log10(lo), np.log10(hi), n)


@dataclass(frozen=True)
class ScanSpec:
    constant: str
    values: tuple[float, ...] = ()
    B: float = 600.0
    base: MoleculeConstants = SRF
    R: float = 500.0
    theta: float = np.pi / 2
    n_max: int = 5

    def __post_init__(self):
        if self.constant not in SCAN_WINDOWS:
            raise ValueError(f"constant must be one of {sorted(SCAN_WINDOWS)}")
        if not self.values:
            object.__setattr__(self, "values", tuple(default_scan_values(self.constant)))
        if any(v <= 0 for v in self.values):
            raise ValueError("scan values must be positive")


@dataclass
class ScanRow:
    value: float
    E_perp: float
    E_z: float
    J_perp: float
    J_z: float
    status: str = "ok"


def scan_constant(scan: ScanSpec) -> list[ScanRow]:
    """E_perp, E_z and the couplings at those fields while one constant varies.

    Points without a crossing (or without the ratio inside the window) are
    kept with NaN values and a status marker.
    """
    geom = PairGeometry(scan.R, scan.theta)
    rows = []
    for v in scan.values:
        mol = replace(scan.base, **{scan.constant: float(v)}, name=f"{scan.base.name}[{scan.constant}={v:.6g}]")
        nan = float("nan")
        try:
            E_perp = find_E_perp(mol, scan.B, n_max=scan.n_max)
        except NoMinimumError as exc:
            log.warning("no crossing at %s=%g: %s", scan.constant, v, exc)
            rows.append(ScanRow(float(v), nan, nan, nan, nan, "no_crossing"))
            continue
        J_perp = pair_couplings(mol, FieldPoint(E_perp, scan.B), geom, n_max=scan.n_max).J_perp
        try:
            E_z = find_E_z(mol, scan.B, E_perp=E_perp, n_max=scan.n_max)
        except WindowError:
            rows.append(ScanRow(float(v), E_perp, nan, J_perp, nan, "no_ratio"))
            continue
        J_z = pair_couplings(mol, FieldPoint(E_z, scan.B), geom, n_max=scan.n_max).J_z
        rows.append(ScanRow(float(v), E_perp, E_z, J_perp, J_z))
    return rows


def coupling_range(B_values, mol: MoleculeConstants = SRF, r1: float = 500.0, r2: float = 1000.0,
                   n_max: int = 5) -> list[tuple[float, float, float, float]]:
    """(B, E_perp, E_z, J_ab) for the side-by-side qubit pair at E_z(B)."""
    out = []
    for B in B_values:
        E_perp, E_z = working_fields(mol, float(B), n_max)
        cfg = two_qubit_rectangle(r1, r2, B=float(B), molecule=mol, n_max=n_max)
        out.append((float(B), E_perp, E_z, float(effective_ising(cfg, E_z).J[0, 1])))
    return out


# ------------------------------------------------------------------ anneals


@dataclass
class Traces:
    """Effective-model parameters along the ramp."""

    s: np.ndarray
    E: np.ndarray
    h: np.ndarray  # (n_s, n_qubits)
    J: np.ndarray  # (n_s, n_qubits, n_qubits)
    Delta: np.ndarray  # (n_s, n_qubits)
    Jz_intra: np.ndarray  # (n_s, n_qubits)


def parameter_traces(config: LatticeConfig, schedule: Schedule, n_points: int = 51) -> Traces:
    s = np.linspace(0.0, schedule.stop_s, n_points)
    E = schedule.field(s)
    h, J, D, Jz = [], [], [], []
    for e in E:
        t = build_coupling_tables(config, float(e))
        m = effective_ising(config, float(e), t)
        h.append(m.h)
        J.append(m.J)
        D.append(m.Delta)
        Jz.append([t.Jz[a, b] for a, b in config.qubits])
    return Traces(s, E, np.array(h), np.array(J), np.array(D), np.array(Jz))


@dataclass
class TwoQubitRun:
    config: LatticeConfig
    schedule: Schedule
    traces: Traces
    result: AnnealResult


def default_schedule(config: LatticeConfig, T: float, n_steps: int, stop_s: float = 1.0,
                     fields: tuple[float, float] | None = None) -> Schedule:
    E_start, E_end = fields if fields is not None else working_fields(config.molecule, config.B, config.n_max)
    return Schedule(E_start, E_end, T, n_steps, stop_s)


def run_two_qubit(T: float = 15.0, n_steps: int = STEPS_1D, config: LatticeConfig | None = None,
                  fields: tuple[float, float] | None = None, n_points: int = 51) -> TwoQubitRun:
    config = two_qubit_rectangle() if config is None else config
    schedule = default_schedule(config, T, n_steps, fields=fields)
    return TwoQubitRun(config, schedule, parameter_traces(config, schedule, n_points), Annealer(config).run(schedule))


def run_times(config: LatticeConfig, times=DEFAULT_TIMES_MS, n_steps: int = STEPS_1D, stop_s: float = 1.0,
              fields: tuple[float, float] | None = None, allow_large: bool = False) -> dict[float, AnnealResult]:
    """One anneal per annealing time; the ground set is computed once."""
    check_size(config, allow_large)
    annealer = Annealer(config)
    base = default_schedule(config, times[0], n_steps, stop_s, fields)
    ground = annealer.ground_set(base.E_end)
    out = {}
    for T in times:
        out[float(T)] = annealer.run(replace(base, T=float(T)), ground_set=ground)
        log.info("%s T=%g ms: p_solution=%.4f p_invalid=%.4f", config.name, T,
                 out[float(T)].p_solution[-1], out[float(T)].p_invalid[-1])
    return out


def run_chain_1d(n_qubits: int = 6, times=DEFAULT_TIMES_MS, n_steps: int = STEPS_1D, ferro: bool = False,
                 **kw) -> dict[float, AnnealResult]:
    return run_times(chain_1d(n_qubits, ferro=ferro), times, n_steps, **kw)


def run_lattice_2d(rows: int = 2, cols: int = 3, times=DEFAULT_TIMES_MS, n_steps: int = STEPS_2D,
                   **kw) -> dict[float, AnnealResult]:
    return run_times(grid_2d(rows, cols), times, n_steps, **kw)


# ------------------------------------------------------------------ scaling

FAMILIES = ("1D-AF", "1D-FM", "2D-AF")
DEFAULT_SIZES = {
    "1D-AF": (1, 2, 3, 4, 5, 6),
    "1D-FM": (1, 2, 3, 4, 5, 6),
    "2D-AF": ((2, 2), (2, 3), (2, 4)),
}


def family_config(family: str, size) -> LatticeConfig:
    if family == "1D-AF":
        return chain_1d(int(size))
    if family == "1D-FM":
        return chain_1d(int(size), ferro=True)
    if family == "2D-AF":
        rows, cols = size
        return grid_2d(int(rows), int(cols))
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


@dataclass
class ScalingRow:
    family: str
    size: str
    n_qubits: int
    dim: int
    best_T: float
    p_solution: float
    p_invalid: float
    per_time: dict[float, tuple[float, float]] = field(default_factory=dict)  # T -> (p_solution, p_invalid)


def scaling_study(family: str, sizes=None, times=DEFAULT_TIMES_MS, n_steps: int | None = None,
                  allow_large: bool = False, on_result=None) -> list[ScalingRow]:
    """Per size: final probabilities at the annealing time that maximizes p_solution."""
    sizes = DEFAULT_SIZES[family] if sizes is None else sizes
    steps = n_steps if n_steps is not None else (STEPS_2D if family.startswith("2D") else STEPS_1D)
    rows = []
    for size in sizes:
        config = family_config(family, size)
        dim = check_size(config, allow_large)
        results = run_times(config, times, steps, allow_large=allow_large)
        if on_result is not None:
            on_result(family, size, results)
        rows.append(summarize(family, size, config, dim, results))
    return rows


def summarize(family: str, size, config: LatticeConfig, dim: int, results: dict[float, AnnealResult]) -> ScalingRow:
    per_time = {T: (float(r.p_solution[-1]), float(r.p_invalid[-1])) for T, r in results.items()}
    best = max(per_time, key=lambda T: per_time[T][0])
    label = "x".join(map(str, size)) if isinstance(size, tuple) else str(size)
    return ScalingRow(family, label, config.n_qubits, dim, best, *per_time[best], per_time)


# ----------------------------------------------------------------- 3D stack


@dataclass
class StackParameters:
    config: LatticeConfig
    traces: Traces
    layer: np.ndarray  # layer index per qubit
    ground: list[str]

    def layer_pairs(self, same: bool) -> list[tuple[int, int]]:
        n = self.config.n_qubits
        return [(a, b) for a in range(n) for b in range(a + 1, n) if (self.layer[a] == self.layer[b]) == same]


def stack_3d_parameters(layers: int = 3, rows: int = 2, cols: int = 2, n_points: int = 51,
                        fields: tuple[float, float] | None = None) -> StackParameters:
    config = stack_3d(layers, rows, cols)
    schedule = default_schedule(config, 1.0, 1, fields=fields)
    traces = parameter_traces(config, schedule, n_points)
    per_layer = rows * cols
    layer = np.arange(config.n_qubits) // per_layer
    model = effective_ising(config, schedule.E_end)
    ground = brute_force_ground(model)[1] if config.n_qubits <= 24 else []
    return StackParameters(config, traces, layer, ground)
